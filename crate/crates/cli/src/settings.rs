//! Run settings: defaults, then a `key=value` file, then command-line flags.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use vcluster::config::MachineConfig;
use vcluster::energy::EnergyProfile;
use vcluster::kernels::{KernelKind, DEFAULT_SEED};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub machine: MachineConfig,
    pub kernel: KernelKind,
    pub n: usize,
    pub seed: u64,
    pub profile: EnergyProfile,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            machine: MachineConfig::default(),
            kernel: KernelKind::Matmul,
            n: 64,
            seed: DEFAULT_SEED,
            profile: EnergyProfile::Model,
        }
    }
}

pub fn parse_profile(s: &str) -> Result<EnergyProfile> {
    match s {
        "model" => Ok(EnergyProfile::Model),
        "measured" => Ok(EnergyProfile::Measured),
        other => bail!("unknown energy profile `{other}` (expected model or measured)"),
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let digits = value.replace('_', "");
    let parsed = match digits.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16)
            .with_context(|| format!("`{key}` expects a number, got `{value}`"))?
            .to_string()
            .parse::<T>(),
        None => digits.parse::<T>(),
    };
    parsed.with_context(|| format!("`{key}` expects a number, got `{value}`"))
}

impl RunConfig {
    /// Applies one setting by name. Keys match the long flag names, with `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let m = &mut self.machine;
        match key.replace('-', "_").as_str() {
            "pes" => m.pes = number(key, value)?,
            "fpus" => m.fpus = number(key, value)?,
            "vlen" => m.vlen_bytes = number(key, value)?,
            "vlsu_ports" => m.vlsu_ports = number(key, value)?,
            "banks" => m.l1_banks = number(key, value)?,
            "bank_bytes" => m.bank_bytes = number(key, value)?,
            "fpu_latency" => m.fpu_latency = number(key, value)?,
            "rob_depth" => m.rob_depth = number(key, value)?,
            "ctrl_queue" => m.ctrl_queue = number(key, value)?,
            "scalar_lsu_depth" => m.scalar_lsu_depth = number(key, value)?,
            "kernel" => self.kernel = value.parse()?,
            "n" => self.n = number(key, value)?,
            "seed" => self.seed = number(key, value)?,
            "profile" => self.profile = parse_profile(value)?,
            _ => bail!("unknown setting `{key}`"),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("{origin}:{}: expected `key = value`, got `{line}`", i + 1);
            };
            self.set(key.trim(), value.trim())
                .with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_text(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_settings_override_defaults() {
        let mut rc = RunConfig::default();
        rc.apply_text("# cluster\npes = 4\nvlsu-ports=8\nkernel = dotp # trailing\nseed = 0x10\n", "t")
            .unwrap();
        assert_eq!(rc.machine.pes, 4);
        assert_eq!(rc.machine.vlsu_ports, 8);
        assert_eq!(rc.kernel, KernelKind::Dotp);
        assert_eq!(rc.seed, 16);
    }

    #[test]
    fn bad_lines_name_their_location() {
        let mut rc = RunConfig::default();
        let e = rc.apply_text("pes = 2\nfpus four\n", "cfg").unwrap_err();
        assert!(e.to_string().contains("cfg:2"), "{e}");
        let e = rc.apply_text("colour = red\n", "cfg").unwrap_err();
        assert!(format!("{e:#}").contains("unknown setting"), "{e:#}");
        assert!(rc.set("n", "-1").is_err());
    }
}
