use std::collections::{BTreeMap, HashMap};

use super::types::*;
use super::{IsaError, ParseError, ParseErrorKind, Program};

struct RawInstr {
    line: usize,
    column: usize,
    mnemonic: String,
    operands: Vec<(String, usize)>,
}

enum Section {
    Text(usize),
    Data,
}

/// Parses assembly text into a [`Program`].
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut section = Section::Text(0);
    let mut current_pe = 0;
    let mut image: Vec<u8> = Vec::new();
    let mut symbols: BTreeMap<String, u64> = BTreeMap::new();
    let mut labels: Vec<HashMap<String, usize>> = vec![HashMap::new()];
    let mut raw: Vec<Vec<RawInstr>> = vec![Vec::new()];

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let code = match full.find('#') {
            Some(p) => &full[..p],
            None => full,
        };
        let mut rest = code;
        // Leading labels, possibly several on one line.
        loop {
            let trimmed = rest.trim_start();
            let Some(colon) = trimmed.find(':') else {
                rest = trimmed;
                break;
            };
            let name = &trimmed[..colon];
            if !is_identifier(name) {
                rest = trimmed;
                break;
            }
            let column = column_of(full, trimmed);
            let dup = match section {
                Section::Data => symbols.insert(name.to_string(), image.len() as u64).is_some(),
                Section::Text(pe) => {
                    let at = raw[pe].len();
                    labels[pe].insert(name.to_string(), at).is_some()
                }
            };
            if dup {
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::DuplicateLabel(name.to_string()),
                });
            }
            rest = &trimmed[colon + 1..];
        }
        let rest = rest.trim_end();
        if rest.is_empty() {
            continue;
        }
        let column = column_of(full, rest);
        let (head, tail) = match rest.find(char::is_whitespace) {
            Some(p) => (&rest[..p], &rest[p..]),
            None => (rest, ""),
        };
        let operands = split_operands(full, tail);
        let err = |column, kind| ParseError { line, column, kind };

        if let Some(directive) = head.strip_prefix('.') {
            match directive {
                "data" => section = Section::Data,
                "text" => section = Section::Text(current_pe),
                "pe" => {
                    let [(arg, col)] = operands.as_slice() else {
                        return Err(err(column, syntax("`.pe` takes one PE index")));
                    };
                    let pe: usize = arg
                        .parse()
                        .ok()
                        .filter(|&p| p < 64)
                        .ok_or_else(|| err(*col, syntax("PE index must be in 0..64")))?;
                    while raw.len() <= pe {
                        raw.push(Vec::new());
                        labels.push(HashMap::new());
                    }
                    current_pe = pe;
                    section = Section::Text(pe);
                }
                "dword" | "byte" | "zero" | "align" => {
                    if !matches!(section, Section::Data) {
                        return Err(err(column, syntax("data directive outside `.data`")));
                    }
                    data_directive(directive, &operands, &mut image)
                        .map_err(|(col, kind)| err(col, kind))?;
                }
                _ => {
                    return Err(err(
                        column,
                        ParseErrorKind::UnknownDirective(head.to_string()),
                    ))
                }
            }
            continue;
        }

        match section {
            Section::Data => return Err(err(column, syntax("instruction inside `.data`"))),
            Section::Text(pe) => raw[pe].push(RawInstr {
                line,
                column,
                mnemonic: head.to_string(),
                operands,
            }),
        }
    }

    let mut pes = Vec::with_capacity(raw.len());
    let mut lines = Vec::with_capacity(raw.len());
    for (pe, instrs) in raw.iter().enumerate() {
        let mut vtype = (Sew::E64, Lmul::M1);
        let mut code = Vec::with_capacity(instrs.len());
        for ri in instrs {
            let instr = assemble(ri, &labels[pe], &symbols, &mut vtype).map_err(|(column, kind)| {
                ParseError {
                    line: ri.line,
                    column,
                    kind,
                }
            })?;
            code.push(instr);
        }
        lines.push(instrs.iter().map(|r| r.line).collect());
        pes.push(code);
    }
    while pes.len() > 1 && pes.last().is_some_and(Vec::is_empty) {
        pes.pop();
        lines.pop();
    }

    Ok(Program {
        pes,
        image,
        symbols,
        lines,
    })
}

fn syntax(msg: &str) -> ParseErrorKind {
    ParseErrorKind::Syntax(msg.to_string())
}

fn column_of(full: &str, part: &str) -> usize {
    part.as_ptr() as usize - full.as_ptr() as usize + 1
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '.' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '$')
}

fn split_operands(full: &str, tail: &str) -> Vec<(String, usize)> {
    if tail.trim().is_empty() {
        return Vec::new();
    }
    tail.split(',')
        .map(|piece| {
            let t = piece.trim();
            let col = if t.is_empty() {
                column_of(full, piece)
            } else {
                column_of(full, t)
            };
            (t.to_string(), col)
        })
        .collect()
}

type Located = (usize, ParseErrorKind);

fn parse_int(s: &str) -> Option<i128> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let v = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i128::from_str_radix(&hex.replace('_', ""), 16).ok()?
    } else {
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit() || b == b'_') {
            return None;
        }
        body.replace('_', "").parse::<i128>().ok()?
    };
    Some(if neg { -v } else { v })
}

fn data_directive(
    directive: &str,
    operands: &[(String, usize)],
    image: &mut Vec<u8>,
) -> Result<(), Located> {
    let first_col = operands.first().map_or(1, |o| o.1);
    match directive {
        "dword" => {
            if operands.is_empty() {
                return Err((first_col, syntax("`.dword` needs at least one value")));
            }
            for (text, col) in operands {
                let bits = if let Some(v) = parse_int(text) {
                    if v < i64::MIN as i128 || v > u64::MAX as i128 {
                        return Err((*col, syntax("value does not fit 64 bits")));
                    }
                    v as u64
                } else if let Ok(f) = text.parse::<f64>() {
                    f.to_bits()
                } else {
                    return Err((*col, syntax("expected an integer or floating-point literal")));
                };
                image.extend_from_slice(&bits.to_le_bytes());
            }
        }
        "byte" => {
            if operands.is_empty() {
                return Err((first_col, syntax("`.byte` needs at least one value")));
            }
            for (text, col) in operands {
                let v = parse_int(text)
                    .filter(|v| (-128..=255).contains(v))
                    .ok_or((*col, syntax("expected a byte value")))?;
                image.push(v as u8);
            }
        }
        "zero" => {
            let [(text, col)] = operands else {
                return Err((first_col, syntax("`.zero` takes one byte count")));
            };
            let n = parse_int(text)
                .filter(|v| (0..=(1 << 24)).contains(v))
                .ok_or((*col, syntax("expected a byte count")))?;
            image.resize(image.len() + n as usize, 0);
        }
        "align" => {
            let [(text, col)] = operands else {
                return Err((first_col, syntax("`.align` takes one exponent")));
            };
            let p = parse_int(text)
                .filter(|v| (0..=16).contains(v))
                .ok_or((*col, syntax("expected an alignment exponent in 0..=16")))?;
            let a = 1usize << p;
            image.resize(image.len().div_ceil(a) * a, 0);
        }
        _ => unreachable!(),
    }
    Ok(())
}

struct Ops<'a> {
    ops: &'a [(String, usize)],
    column: usize,
}

impl<'a> Ops<'a> {
    fn expect(&self, n: usize) -> Result<(), Located> {
        if self.ops.len() == n {
            Ok(())
        } else {
            Err((
                self.column,
                ParseErrorKind::Syntax(format!(
                    "expected {n} operands, found {}",
                    self.ops.len()
                )),
            ))
        }
    }

    fn text(&self, i: usize) -> (&'a str, usize) {
        let (t, c) = &self.ops[i];
        (t.as_str(), *c)
    }

    fn x(&self, i: usize) -> Result<XReg, Located> {
        let (t, c) = self.text(i);
        if let Some(r) = XReg::parse(t) {
            return Ok(r);
        }
        Err((c, register_error(t, 'x', "scalar register")))
    }

    fn f(&self, i: usize) -> Result<FReg, Located> {
        let (t, c) = self.text(i);
        if let Some(r) = FReg::parse(t) {
            return Ok(r);
        }
        Err((c, register_error(t, 'f', "floating-point register")))
    }

    fn v(&self, i: usize) -> Result<VReg, Located> {
        let (t, c) = self.text(i);
        match VReg::parse_index(t) {
            Some(n) if n < 32 => Ok(VReg(n as u8)),
            Some(n) => Err((c, IsaError::RegisterIndex(n).into())),
            None => Err((c, syntax("expected a vector register"))),
        }
    }

    fn imm(&self, i: usize) -> Result<i64, Located> {
        let (t, c) = self.text(i);
        parse_int(t)
            .filter(|v| *v >= i64::MIN as i128 && *v <= i64::MAX as i128)
            .map(|v| v as i64)
            .ok_or((c, syntax("expected an integer immediate")))
    }

    /// `(rs1)` with no offset, as used by vector memory instructions.
    fn vbase(&self, i: usize) -> Result<XReg, Located> {
        let (t, c) = self.text(i);
        let inner = t
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or((c, syntax("expected a `(rs1)` memory operand")))?;
        XReg::parse(inner.trim()).ok_or((
            c + 1,
            ParseErrorKind::Syntax(format!(
                "`{}` is not a scalar register in memory operand",
                inner.trim()
            )),
        ))
    }

    /// `offset(rs1)` for scalar memory instructions.
    fn mem(&self, i: usize) -> Result<(i64, XReg), Located> {
        let (t, c) = self.text(i);
        let open = t
            .find('(')
            .ok_or((c, syntax("expected an `offset(rs1)` memory operand")))?;
        let inner = t[open + 1..]
            .strip_suffix(')')
            .ok_or((c, syntax("unterminated memory operand")))?;
        let offset = if open == 0 {
            0
        } else {
            parse_int(t[..open].trim())
                .filter(|v| v.abs() < (1 << 40))
                .ok_or((c, syntax("expected an integer offset")))? as i64
        };
        let base = XReg::parse(inner.trim()).ok_or((
            c + open + 1,
            ParseErrorKind::Syntax(format!("`{}` is not a scalar register", inner.trim())),
        ))?;
        Ok((offset, base))
    }

    fn operand(&self, i: usize) -> Result<Operand, Located> {
        let (t, _) = self.text(i);
        if t.starts_with('v') {
            self.v(i).map(Operand::Vector)
        } else {
            self.f(i).map(Operand::Scalar)
        }
    }
}

fn register_error(t: &str, prefix: char, what: &str) -> ParseErrorKind {
    if let Some(d) = t.strip_prefix(prefix) {
        if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(n) = d.parse::<u32>() {
                return IsaError::RegisterIndex(n).into();
            }
        }
    }
    ParseErrorKind::Syntax(format!("expected a {what}, found `{t}`"))
}

enum MemKind {
    Load,
    Store,
}

fn memory_mnemonic(m: &str) -> Option<(MemKind, u8, Sew)> {
    // (kind, 0 = unit, 1 = strided, 2 = indexed)
    const FORMS: [(&str, MemKind, u8); 6] = [
        ("vluxei", MemKind::Load, 2),
        ("vsuxei", MemKind::Store, 2),
        ("vlse", MemKind::Load, 1),
        ("vsse", MemKind::Store, 1),
        ("vle", MemKind::Load, 0),
        ("vse", MemKind::Store, 0),
    ];
    for (prefix, kind, mode) in FORMS {
        if let Some(rest) = m.strip_prefix(prefix) {
            let width = rest.strip_suffix(".v")?;
            let sew = Sew::from_bits(width.parse().ok()?)?;
            return Some((kind, mode, sew));
        }
    }
    None
}

fn check_group(reg: VReg, emul: usize, column: usize) -> Result<(), Located> {
    let emul = emul.clamp(1, 8) as u8;
    if !reg.0.is_multiple_of(emul) {
        return Err((
            column,
            IsaError::MisalignedGroup {
                base: reg.0,
                lmul: emul,
            }
            .into(),
        ));
    }
    Ok(())
}

fn assemble(
    ri: &RawInstr,
    labels: &HashMap<String, usize>,
    symbols: &BTreeMap<String, u64>,
    vtype: &mut (Sew, Lmul),
) -> Result<Instr, Located> {
    let o = Ops {
        ops: &ri.operands,
        column: ri.column,
    };
    let m = ri.mnemonic.as_str();
    let ell = vtype.1.value();
    let label = |i: usize| -> Result<usize, Located> {
        let (t, c) = o.text(i);
        labels
            .get(t)
            .copied()
            .ok_or((c, ParseErrorKind::UndefinedLabel(t.to_string())))
    };
    let group = |i: usize, emul: usize| -> Result<VReg, Located> {
        let r = o.v(i)?;
        check_group(r, emul, o.text(i).1)?;
        Ok(r)
    };

    let scalar = |s: ScalarInstr| Ok(Instr::Scalar(s));
    let vector = |v: VectorInstr| Ok(Instr::Vector(v));

    match m {
        "li" => {
            o.expect(2)?;
            let rd = o.x(0)?;
            let (t, c) = o.text(1);
            let imm = match parse_int(t) {
                Some(v) if v >= i64::MIN as i128 && v <= u64::MAX as i128 => v as i64,
                Some(_) => return Err((c, syntax("immediate does not fit 64 bits"))),
                None if is_identifier(t) => *symbols
                    .get(t)
                    .ok_or((c, ParseErrorKind::UndefinedLabel(t.to_string())))?
                    as i64,
                None => return Err((c, syntax("expected an immediate or data label"))),
            };
            scalar(ScalarInstr::Li { rd, imm })
        }
        "add" | "mul" => {
            o.expect(3)?;
            let (rd, rs1, rs2) = (o.x(0)?, o.x(1)?, o.x(2)?);
            scalar(if m == "add" {
                ScalarInstr::Add { rd, rs1, rs2 }
            } else {
                ScalarInstr::Mul { rd, rs1, rs2 }
            })
        }
        "addi" => {
            o.expect(3)?;
            scalar(ScalarInstr::Addi {
                rd: o.x(0)?,
                rs1: o.x(1)?,
                imm: o.imm(2)?,
            })
        }
        "bnez" => {
            o.expect(2)?;
            scalar(ScalarInstr::Bnez {
                rs: o.x(0)?,
                target: label(1)?,
            })
        }
        "blt" => {
            o.expect(3)?;
            scalar(ScalarInstr::Blt {
                rs1: o.x(0)?,
                rs2: o.x(1)?,
                target: label(2)?,
            })
        }
        "j" => {
            o.expect(1)?;
            scalar(ScalarInstr::J { target: label(0)? })
        }
        "ld" => {
            o.expect(2)?;
            let rd = o.x(0)?;
            let (offset, base) = o.mem(1)?;
            scalar(ScalarInstr::Ld { rd, base, offset })
        }
        "sd" => {
            o.expect(2)?;
            let rs2 = o.x(0)?;
            let (offset, base) = o.mem(1)?;
            scalar(ScalarInstr::Sd { rs2, base, offset })
        }
        "flh" | "flw" | "fld" => {
            o.expect(2)?;
            let width = match m {
                "flh" => Sew::E16,
                "flw" => Sew::E32,
                _ => Sew::E64,
            };
            let fd = o.f(0)?;
            let (offset, base) = o.mem(1)?;
            scalar(ScalarInstr::Fl {
                width,
                fd,
                base,
                offset,
            })
        }
        "vsetvli" => {
            if o.ops.len() < 4 {
                return Err((ri.column, syntax("expected `rd, rs1, e<sew>, m<lmul>`")));
            }
            let rd = o.x(0)?;
            let rs1 = o.x(1)?;
            let (st, sc) = o.text(2);
            let sew = st
                .strip_prefix('e')
                .and_then(|b| b.parse().ok())
                .and_then(Sew::from_bits)
                .ok_or((sc, syntax("expected e8, e16, e32 or e64")))?;
            let (lt, lc) = o.text(3);
            let lmul = lt
                .strip_prefix('m')
                .and_then(|b| b.parse().ok())
                .and_then(Lmul::from_value)
                .ok_or((lc, syntax("expected m1, m2, m4 or m8")))?;
            for i in 4..o.ops.len() {
                let (t, c) = o.text(i);
                if !matches!(t, "ta" | "tu" | "ma" | "mu") {
                    return Err((c, syntax("expected a tail/mask policy")));
                }
            }
            *vtype = (sew, lmul);
            vector(VectorInstr::Vsetvli { rd, rs1, sew, lmul })
        }
        "vfadd.vv" | "vfsub.vv" | "vfmul.vv" | "vfadd.vf" | "vfsub.vf" | "vfmul.vf" => {
            o.expect(3)?;
            let op = match &m[2..5] {
                "add" => ArithOp::Add,
                "sub" => ArithOp::Sub,
                _ => ArithOp::Mul,
            };
            let vd = group(0, ell)?;
            let vs2 = group(1, ell)?;
            let src = if m.ends_with(".vv") {
                Operand::Vector(group(2, ell)?)
            } else {
                Operand::Scalar(o.f(2)?)
            };
            vector(VectorInstr::Arith { op, vd, vs2, src })
        }
        "vfmacc.vv" | "vfmacc.vf" | "vfwmacc-sdotp" | "vfwmacc-sdotp.vv"
        | "vfwmacc-sdotp.vf" => {
            o.expect(3)?;
            let vd = group(0, ell)?;
            let src = match m {
                "vfmacc.vv" | "vfwmacc-sdotp.vv" => Operand::Vector(group(1, ell)?),
                "vfmacc.vf" | "vfwmacc-sdotp.vf" => Operand::Scalar(o.f(1)?),
                _ => match o.operand(1)? {
                    Operand::Vector(v) => Operand::Vector(group(1, ell).map(|_| v)?),
                    s => s,
                },
            };
            let vs2 = group(2, ell)?;
            vector(if m.starts_with("vfmacc") {
                VectorInstr::Fma { vd, src, vs2 }
            } else {
                VectorInstr::Sdotp { vd, src, vs2 }
            })
        }
        "vslideup.vi" | "vslidedown.vi" => {
            o.expect(3)?;
            let vd = group(0, ell)?;
            let vs2 = group(1, ell)?;
            let shamt = o.imm(2)?;
            if !(0..=i64::from(u32::MAX)).contains(&shamt) {
                return Err((o.text(2).1, syntax("slide amount must be non-negative")));
            }
            let dir = if m == "vslideup.vi" {
                SlideDir::Up
            } else {
                SlideDir::Down
            };
            vector(VectorInstr::Slide {
                dir,
                vd,
                vs2,
                shamt: shamt as u32,
            })
        }
        "vfredsum.vs" | "vfredusum.vs" | "vfredosum.vs" => {
            o.expect(3)?;
            vector(VectorInstr::RedSum {
                vd: o.v(0)?,
                vs2: group(1, ell)?,
                vs1: o.v(2)?,
            })
        }
        _ => {
            let Some((kind, mode, eew)) = memory_mnemonic(m) else {
                return Err((ri.column, ParseErrorKind::UnknownMnemonic(m.to_string())));
            };
            let sew = vtype.0;
            let scaled = (ell * eew.bits() / sew.bits()).max(1);
            let (data_emul, index_emul) = if mode == 2 { (ell, scaled) } else { (scaled, 0) };
            o.expect(if mode == 0 { 2 } else { 3 })?;
            let reg = group(0, data_emul)?;
            let base = o.vbase(1)?;
            let mode = match mode {
                0 => AddrMode::UnitStride,
                1 => AddrMode::Strided(o.x(2)?),
                _ => AddrMode::Indexed(group(2, index_emul)?),
            };
            vector(match kind {
                MemKind::Load => VectorInstr::Load {
                    vd: reg,
                    base,
                    eew,
                    mode,
                },
                MemKind::Store => VectorInstr::Store {
                    vs3: reg,
                    base,
                    eew,
                    mode,
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(text: &str) -> Instr {
        let p = parse_program(text).unwrap();
        assert_eq!(p.pes[0].len(), 1);
        p.pes[0][0]
    }

    #[test]
    fn fma_operands() {
        let i = one("vsetvli t0, a0, e64, m4\n");
        assert_eq!(
            i,
            Instr::Vector(VectorInstr::Vsetvli {
                rd: XReg(5),
                rs1: XReg(10),
                sew: Sew::E64,
                lmul: Lmul::M4
            })
        );
        let p = parse_program("vsetvli t0, a0, e64, m4\nvfmacc.vv v8, v4, v0").unwrap();
        let Instr::Vector(v) = p.pes[0][1] else {
            panic!()
        };
        assert_eq!(v.class(), InstrClass::Fma);
        assert_eq!(v.dest(), Some(VReg(8)));
        assert_eq!(v.vector_sources(), vec![VReg(4), VReg(0), VReg(8)]);
    }

    #[test]
    fn memory_operand_must_be_register() {
        let e = parse_program("vsetvli t0, a0, e64, m1\n  vle64.v v0, (buf)\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        let e = parse_program("li a1, missing\n").unwrap_err();
        assert_eq!(e.line, 1);
        assert_eq!(e.column, 8);
        assert_eq!(e.kind, ParseErrorKind::UndefinedLabel("missing".into()));
    }

    #[test]
    fn error_kinds() {
        let e = parse_program("vfoo.vv v1, v2, v3").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownMnemonic("vfoo.vv".into()));
        let e = parse_program("vfadd.vv v1, v2, v40").unwrap_err();
        assert_eq!(e.kind, IsaError::RegisterIndex(40).into());
        let e = parse_program("add x1, x2, x33").unwrap_err();
        assert_eq!(e.kind, IsaError::RegisterIndex(33).into());
        let e = parse_program("vsetvli t0, a0, e64, m4\nvfadd.vv v6, v8, v12").unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.column, 10);
        assert_eq!(
            e.kind,
            IsaError::MisalignedGroup { base: 6, lmul: 4 }.into()
        );
        let e = parse_program("bnez t0, nowhere").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UndefinedLabel("nowhere".into()));
        let e = parse_program("x: li t0, 1\nx: li t0, 2").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateLabel("x".into()));
    }

    #[test]
    fn data_and_labels() {
        let p = parse_program(
            ".data\na: .dword 1, 0x10, -1, 1.5\n.byte 7\n.align 3\nb:\n.zero 8\n.text\nli a0, b\nloop: addi a0, a0, -1\nbnez a0, loop\n",
        )
        .unwrap();
        assert_eq!(p.symbol("a"), Some(0));
        assert_eq!(p.symbol("b"), Some(40));
        assert_eq!(p.image.len(), 48);
        assert_eq!(&p.image[8..16], &16u64.to_le_bytes());
        assert_eq!(&p.image[24..32], &1.5f64.to_bits().to_le_bytes());
        assert_eq!(p.image[32], 7);
        assert_eq!(p.pes[0][0], Instr::Scalar(ScalarInstr::Li { rd: XReg(10), imm: 40 }));
        assert_eq!(
            p.pes[0][2],
            Instr::Scalar(ScalarInstr::Bnez {
                rs: XReg(10),
                target: 1
            })
        );
        assert_eq!(p.source_line(0, 2), Some(10));
    }

    #[test]
    fn per_pe_sections() {
        let p = parse_program(".pe 1\nl: j l\n.pe 0\nl: li t0, 3\n").unwrap();
        assert_eq!(p.pes.len(), 2);
        assert_eq!(p.pes[1][0], Instr::Scalar(ScalarInstr::J { target: 0 }));
        assert_eq!(p.pes[0].len(), 1);
    }

    #[test]
    fn memory_forms() {
        let p = parse_program(
            "vsetvli t0, a0, e64, m4\nvlse64.v v4, (a1), t1\nvluxei64.v v8, (a1), v12\nvse64.v v8, (a2)\nfld fa0, 16(a3)\nsd t0, -8(sp)",
        )
        .unwrap();
        assert_eq!(
            p.pes[0][1],
            Instr::Vector(VectorInstr::Load {
                vd: VReg(4),
                base: XReg(11),
                eew: Sew::E64,
                mode: AddrMode::Strided(XReg(6))
            })
        );
        assert_eq!(
            p.pes[0][2],
            Instr::Vector(VectorInstr::Load {
                vd: VReg(8),
                base: XReg(11),
                eew: Sew::E64,
                mode: AddrMode::Indexed(VReg(12))
            })
        );
        assert_eq!(
            p.pes[0][4],
            Instr::Scalar(ScalarInstr::Fl {
                width: Sew::E64,
                fd: FReg(10),
                base: XReg(13),
                offset: 16
            })
        );
        assert_eq!(
            p.pes[0][5],
            Instr::Scalar(ScalarInstr::Sd {
                rs2: XReg(5),
                base: XReg(2),
                offset: -8
            })
        );
    }

    #[test]
    fn sdotp_forms() {
        let p = parse_program(
            "vsetvli t0, a0, e16, m4\nvfwmacc-sdotp v8, v4, v0\nvfwmacc-sdotp v8, fa0, v0",
        )
        .unwrap();
        assert_eq!(
            p.pes[0][1],
            Instr::Vector(VectorInstr::Sdotp {
                vd: VReg(8),
                src: Operand::Vector(VReg(4)),
                vs2: VReg(0)
            })
        );
        assert_eq!(
            p.pes[0][2],
            Instr::Vector(VectorInstr::Sdotp {
                vd: VReg(8),
                src: Operand::Scalar(FReg(10)),
                vs2: VReg(0)
            })
        );
    }
}
