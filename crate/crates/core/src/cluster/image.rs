//! Memory image files: raw binary, or a textual hex dump.
//!
//! The hex format starts with an `@<address>` line giving the base byte address
//! (hexadecimal), followed by whitespace-separated two-digit hex bytes. `#` starts a
//! comment. Further `@` lines start a new contiguous run; gaps are zero-filled.

use std::fmt::Write as _;

use super::ClusterError;

/// Contiguous bytes placed at `base`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryImage {
    pub base: u64,
    pub bytes: Vec<u8>,
}

impl MemoryImage {
    pub fn from_binary(base: u64, bytes: Vec<u8>) -> Self {
        Self { base, bytes }
    }

    pub fn parse_hex(text: &str) -> Result<Self, ClusterError> {
        let mut image: Option<MemoryImage> = None;
        let mut cursor = 0u64;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| ClusterError::HexSyntax {
                line: n + 1,
                detail: what.to_string(),
            };
            if let Some(addr) = line.strip_prefix('@') {
                let addr = u64::from_str_radix(addr.trim().trim_start_matches("0x"), 16)
                    .map_err(|_| bad("bad address"))?;
                match &image {
                    None => {
                        image = Some(MemoryImage {
                            base: addr,
                            bytes: Vec::new(),
                        })
                    }
                    Some(img) if addr < img.base + img.bytes.len() as u64 => {
                        return Err(bad("address runs must be increasing"));
                    }
                    Some(_) => {}
                }
                cursor = addr;
                continue;
            }
            let img = image.as_mut().ok_or_else(|| bad("data before the @address header"))?;
            let at = (cursor - img.base) as usize;
            img.bytes.resize(at, 0);
            for tok in line.split_whitespace() {
                if tok.len() != 2 {
                    return Err(bad("expected two-digit hex bytes"));
                }
                let b = u8::from_str_radix(tok, 16).map_err(|_| bad("expected two-digit hex bytes"))?;
                img.bytes.push(b);
                cursor += 1;
            }
        }
        image.ok_or(ClusterError::HexSyntax {
            line: 0,
            detail: "missing @address header".into(),
        })
    }

    /// Hex dump with 16 bytes per line.
    pub fn to_hex(&self) -> String {
        let mut out = format!("@{:x}\n", self.base);
        for row in self.bytes.chunks(16) {
            let line: Vec<String> = row.iter().map(|b| format!("{b:02x}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Copies the image into `memory`, which is indexed from address 0.
    pub fn place(&self, memory: &mut [u8]) -> Result<(), ClusterError> {
        let end = self.base as usize + self.bytes.len();
        if end > memory.len() {
            return Err(ClusterError::OutOfRange {
                addr: end as u64,
                size: memory.len(),
            });
        }
        memory[self.base as usize..end].copy_from_slice(&self.bytes);
        Ok(())
    }

    /// Takes `len` bytes of `memory` at `base`.
    pub fn extract(memory: &[u8], base: u64, len: usize) -> Result<Self, ClusterError> {
        let end = base as usize + len;
        let bytes = memory.get(base as usize..end).ok_or(ClusterError::OutOfRange {
            addr: end as u64,
            size: memory.len(),
        })?;
        Ok(Self {
            base,
            bytes: bytes.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let img = MemoryImage {
            base: 0x40,
            bytes: (0..37).collect(),
        };
        assert_eq!(MemoryImage::parse_hex(&img.to_hex()).unwrap(), img);
    }

    #[test]
    fn gaps_are_zero_filled() {
        let img = MemoryImage::parse_hex("@10\n01 02\n@14 # next\nff\n").unwrap();
        assert_eq!(img.base, 0x10);
        assert_eq!(img.bytes, vec![1, 2, 0, 0, 0xff]);
        assert!(MemoryImage::parse_hex("01\n").is_err());
        assert!(MemoryImage::parse_hex("@0\n1\n").is_err());
    }

    #[test]
    fn placement_is_bounded() {
        let mut mem = vec![0u8; 16];
        MemoryImage::from_binary(12, vec![9; 4]).place(&mut mem).unwrap();
        assert_eq!(mem[12..], [9; 4]);
        assert!(MemoryImage::from_binary(13, vec![9; 4]).place(&mut mem).is_err());
        assert_eq!(MemoryImage::extract(&mem, 12, 4).unwrap().bytes, vec![9; 4]);
    }
}
