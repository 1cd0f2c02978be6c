//! The operator-spec file format: a line-oriented, diff-able description of
//! index sets, named operators, the block assembly, certificates, probe
//! dictionaries and tolerances. Complex literals are written as `(re,im)`
//! pairs with shortest-roundtrip floats, so emitted files re-parse to the
//! exact same numbers.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;

use boplab_core::analysis::{
    OperatorRole, Sided, StructuralCertificate, StructuralFacts, SymbolInfo,
};
use boplab_core::boperator::{BOperator, BlockVector};
use boplab_core::opcore::{BandedOperator, CoefFn, Index, IndexSet, SupportVector};

type C64 = Complex64;

pub struct BuiltSpec {
    pub name: String,
    pub operator: BOperator,
    pub facts: StructuralFacts,
    pub wot_dictionary: Vec<(BlockVector, BlockVector)>,
    pub sot_probes: Vec<BlockVector>,
    pub horizon: u32,
    pub tol: f64,
    pub seed: u64,
}

pub fn parse_complex(token: &str) -> Result<C64> {
    let inner = token
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| anyhow!("complex literal must look like (re,im), got {token:?}"))?;
    let (re, im) = inner
        .split_once(',')
        .ok_or_else(|| anyhow!("complex literal needs two comma-separated parts: {token:?}"))?;
    Ok(C64::new(
        re.trim()
            .parse::<f64>()
            .with_context(|| format!("bad float {re:?}"))?,
        im.trim()
            .parse::<f64>()
            .with_context(|| format!("bad float {im:?}"))?,
    ))
}

pub fn format_complex(z: C64) -> String {
    format!("({},{})", z.re, z.im)
}

fn kv<'a>(token: &'a str, key: &str) -> Option<&'a str> {
    token.strip_prefix(key).and_then(|s| s.strip_prefix('='))
}

fn need_kv<'a>(tokens: &[&'a str], key: &str) -> Result<&'a str> {
    tokens
        .iter()
        .find_map(|t| kv(t, key))
        .ok_or_else(|| anyhow!("missing {key}=..."))
}

fn parse_index_set(tokens: &[&str]) -> Result<IndexSet> {
    match tokens {
        ["half-line"] => Ok(IndexSet::HalfLine),
        ["full-line"] => Ok(IndexSet::FullLine),
        ["finite", lo, hi] => {
            let lo: Index = lo.parse()?;
            let hi: Index = hi.parse()?;
            Ok(IndexSet::finite(lo, hi)?)
        }
        other => bail!("unknown index set {other:?}"),
    }
}

fn diagonal_symbol(kind: &str, tokens: &[&str]) -> Result<CoefFn> {
    match kind {
        "const" => {
            let c = parse_complex(
                tokens
                    .first()
                    .ok_or_else(|| anyhow!("const needs a value"))?,
            )?;
            Ok(Arc::new(move |_| c))
        }
        "table" => {
            let values: Vec<C64> = tokens
                .iter()
                .map(|t| parse_complex(t))
                .collect::<Result<_>>()?;
            if values.is_empty() {
                bail!("table needs at least one value");
            }
            let table = Arc::new(values);
            Ok(Arc::new(move |k| {
                if k >= 0 && (k as usize) < table.len() {
                    table[k as usize]
                } else {
                    C64::new(0.0, 0.0)
                }
            }))
        }
        "rotation" => {
            let theta: f64 = need_kv(tokens, "theta")?.parse()?;
            let scale = parse_complex(need_kv(tokens, "scale")?)?;
            Ok(Arc::new(move |k| {
                let angle = 2.0 * std::f64::consts::PI * theta * k as f64;
                scale * C64::new(angle.cos(), angle.sin())
            }))
        }
        "roots" => {
            let m: Index = need_kv(tokens, "m")?.parse()?;
            if m < 1 {
                bail!("roots needs m >= 1");
            }
            Ok(Arc::new(move |k| {
                let angle = 2.0 * std::f64::consts::PI * (k.rem_euclid(m)) as f64 / m as f64;
                C64::new(angle.cos(), angle.sin())
            }))
        }
        "indicator" => {
            let modulus: Index = need_kv(tokens, "mod")?.parse()?;
            let residue: Index = need_kv(tokens, "res")?.parse()?;
            let scale = parse_complex(need_kv(tokens, "scale")?)?;
            if modulus < 1 {
                bail!("indicator needs mod >= 1");
            }
            Ok(Arc::new(move |k| {
                if k.rem_euclid(modulus) == residue {
                    scale
                } else {
                    C64::new(0.0, 0.0)
                }
            }))
        }
        "recip" => {
            let modulus: Index = need_kv(tokens, "mod")?.parse()?;
            let residue: Index = need_kv(tokens, "res")?.parse()?;
            if modulus < 1 {
                bail!("recip needs mod >= 1");
            }
            Ok(Arc::new(move |k| {
                if k >= residue && k.rem_euclid(modulus) == residue {
                    let m = (k - residue) / modulus;
                    C64::new(1.0 / (m as f64 + 1.0), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }))
        }
        "halfspace" => {
            let scale = parse_complex(need_kv(tokens, "scale")?)?;
            let side = tokens.first().copied().unwrap_or("pos");
            match side {
                "pos" => Ok(Arc::new(
                    move |k| if k >= 0 { scale } else { C64::new(0.0, 0.0) },
                )),
                "neg" => Ok(Arc::new(
                    move |k| if k < 0 { scale } else { C64::new(0.0, 0.0) },
                )),
                other => bail!("halfspace needs pos|neg, got {other}"),
            }
        }
        other => bail!("unknown diagonal symbol kind {other}"),
    }
}

fn parse_role(token: &str) -> Result<OperatorRole> {
    match token {
        "V" => Ok(OperatorRole::V),
        "E" => Ok(OperatorRole::E),
        "X" => Ok(OperatorRole::X),
        "|E|" => Ok(OperatorRole::ModulusE),
        "|X|" => Ok(OperatorRole::ModulusX),
        other => bail!("unknown role {other} (expected V, E, X, |E| or |X|)"),
    }
}

struct PendingBlocks {
    v: Option<String>,
    e: Option<String>,
    x: Option<String>,
}

/// Parses and assembles a spec file. Errors carry the offending line.
pub fn parse(text: &str) -> Result<BuiltSpec> {
    let mut lines = text.lines().enumerate().filter_map(|(no, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((no + 1, line))
        }
    });
    let (_, header) = lines.next().ok_or_else(|| anyhow!("empty spec file"))?;
    if header != "bspec 1" {
        bail!("expected header 'bspec 1', got {header:?}");
    }

    let mut name = String::from("unnamed");
    let mut indexes: BTreeMap<String, IndexSet> = BTreeMap::new();
    let mut ops: BTreeMap<String, BandedOperator> = BTreeMap::new();
    let mut blocks = PendingBlocks {
        v: None,
        e: None,
        x: None,
    };
    let mut certs: Vec<(OperatorRole, StructuralCertificate)> = Vec::new();
    let mut probe_lines: Vec<(String, Vec<String>)> = Vec::new();
    let mut horizon: u32 = boplab_core::DEFAULT_HORIZON;
    let mut tol: f64 = boplab_core::DEFAULT_PROBE_TOL;
    let mut seed: u64 = 0;

    for (no, line) in lines {
        let with_line = |e: anyhow::Error| anyhow!("line {no}: {e}");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "name" => name = tokens[1..].join(" "),
            "index" => {
                if tokens.len() < 3 {
                    return Err(with_line(anyhow!("index needs a name and a kind")));
                }
                let set = parse_index_set(&tokens[2..]).map_err(with_line)?;
                indexes.insert(tokens[1].to_string(), set);
            }
            "op" => {
                if tokens.len() < 3 {
                    return Err(with_line(anyhow!("op needs a name and a kind")));
                }
                let op = build_op(&tokens[1..], &indexes, &ops).map_err(with_line)?;
                ops.insert(tokens[1].to_string(), op);
            }
            "block" => {
                if tokens.len() != 3 {
                    return Err(with_line(anyhow!("block needs a role and an op name")));
                }
                let slot = match tokens[1] {
                    "V" => &mut blocks.v,
                    "E" => &mut blocks.e,
                    "X" => &mut blocks.x,
                    other => return Err(with_line(anyhow!("unknown block role {other}"))),
                };
                *slot = Some(tokens[2].to_string());
            }
            "cert" => {
                if tokens.len() < 3 {
                    return Err(with_line(anyhow!("cert needs a role and a kind")));
                }
                let role = parse_role(tokens[1]).map_err(with_line)?;
                let cert = build_cert(&tokens[2..], &ops).map_err(with_line)?;
                certs.push((role, cert));
            }
            "probe" => {
                if tokens.len() < 2 {
                    return Err(with_line(anyhow!("probe needs a mode")));
                }
                probe_lines.push((
                    tokens[1].to_string(),
                    tokens[2..].iter().map(|s| s.to_string()).collect(),
                ));
            }
            "horizon" => horizon = tokens[1].parse().map_err(|e| with_line(anyhow!("{e}")))?,
            "tol" => tol = tokens[1].parse().map_err(|e| with_line(anyhow!("{e}")))?,
            "seed" => seed = tokens[1].parse().map_err(|e| with_line(anyhow!("{e}")))?,
            other => return Err(with_line(anyhow!("unknown directive {other}"))),
        }
    }

    let get_block = |slot: &Option<String>, role: &str| -> Result<BandedOperator> {
        let name = slot
            .as_ref()
            .ok_or_else(|| anyhow!("block {role} not assigned"))?;
        ops.get(name)
            .cloned()
            .ok_or_else(|| anyhow!("block {role} references unknown op {name}"))
    };
    let operator = BOperator::new(
        get_block(&blocks.v, "V")?,
        get_block(&blocks.e, "E")?,
        get_block(&blocks.x, "X")?,
    )?;

    let mut facts = StructuralFacts::new();
    for (role, cert) in certs {
        facts.push(role, cert);
    }

    let mut wot_dictionary = Vec::new();
    let mut sot_probes = Vec::new();
    for (mode, args) in &probe_lines {
        match mode.as_str() {
            "wot" => {
                if args.len() != 4 {
                    bail!("probe wot needs: <part> <index> <part> <index>");
                }
                let f = block_basis(&operator, &args[0], &args[1])?;
                let g = block_basis(&operator, &args[2], &args[3])?;
                wot_dictionary.push((f, g));
            }
            "sot" => {
                if args.len() != 2 {
                    bail!("probe sot needs: <part> <index>");
                }
                sot_probes.push(block_basis(&operator, &args[0], &args[1])?);
            }
            other => bail!("unknown probe mode {other}"),
        }
    }
    if wot_dictionary.is_empty() {
        wot_dictionary = default_dictionary(&operator)?;
    }
    if sot_probes.is_empty() {
        sot_probes = default_sot_probes(&operator)?;
    }

    Ok(BuiltSpec {
        name,
        operator,
        facts,
        wot_dictionary,
        sot_probes,
        horizon,
        tol,
        seed,
    })
}

fn block_basis(t: &BOperator, part: &str, index: &str) -> Result<BlockVector> {
    let idx: Index = index.parse()?;
    match part {
        "top" => Ok(BlockVector::from_top(
            SupportVector::basis(t.h1(), idx)?,
            t.h2(),
        )),
        "bottom" => Ok(BlockVector::from_bottom(
            t.h1(),
            SupportVector::basis(t.h2(), idx)?,
        )),
        other => bail!("probe part must be top or bottom, got {other}"),
    }
}

fn default_dictionary(t: &BOperator) -> Result<Vec<(BlockVector, BlockVector)>> {
    let mut dict = Vec::new();
    let top: Vec<BlockVector> = t
        .h1()
        .probe_indices(3)
        .into_iter()
        .map(|i| {
            Ok(BlockVector::from_top(
                SupportVector::basis(t.h1(), i)?,
                t.h2(),
            ))
        })
        .collect::<Result<_>>()?;
    let bottom: Vec<BlockVector> = t
        .h2()
        .probe_indices(3)
        .into_iter()
        .map(|k| {
            Ok(BlockVector::from_bottom(
                t.h1(),
                SupportVector::basis(t.h2(), k)?,
            ))
        })
        .collect::<Result<_>>()?;
    for f in top.iter().chain(&bottom) {
        for g in top.iter().chain(&bottom) {
            dict.push((f.clone(), g.clone()));
        }
    }
    Ok(dict)
}

fn default_sot_probes(t: &BOperator) -> Result<Vec<BlockVector>> {
    let mut probes = Vec::new();
    for i in t.h1().probe_indices(2) {
        probes.push(BlockVector::from_top(
            SupportVector::basis(t.h1(), i)?,
            t.h2(),
        ));
    }
    for k in t.h2().probe_indices(2) {
        probes.push(BlockVector::from_bottom(
            t.h1(),
            SupportVector::basis(t.h2(), k)?,
        ));
    }
    Ok(probes)
}

fn build_op(
    tokens: &[&str],
    indexes: &BTreeMap<String, IndexSet>,
    ops: &BTreeMap<String, BandedOperator>,
) -> Result<BandedOperator> {
    let set_of = |name: &str| -> Result<IndexSet> {
        indexes
            .get(name)
            .copied()
            .ok_or_else(|| anyhow!("unknown index set {name}"))
    };
    let op_of = |name: &str| -> Result<BandedOperator> {
        ops.get(name)
            .cloned()
            .ok_or_else(|| anyhow!("unknown op {name}"))
    };
    // tokens[0] is the new op's name.
    let kind = tokens.get(1).ok_or_else(|| anyhow!("op needs a kind"))?;
    let rest = &tokens[2..];
    match *kind {
        "shift" => {
            // shift <src> [-> <dst>] [stride=p] [offset=d]
            let src = set_of(rest.first().ok_or_else(|| anyhow!("shift needs a space"))?)?;
            let (dst, args) = if rest.len() >= 3 && rest[1] == "->" {
                (set_of(rest[2])?, &rest[3..])
            } else {
                (src, &rest[1..])
            };
            let stride: Index = args
                .iter()
                .find_map(|t| kv(t, "stride"))
                .unwrap_or("1")
                .parse()?;
            let offset: Index = args
                .iter()
                .find_map(|t| kv(t, "offset"))
                .unwrap_or("0")
                .parse()?;
            Ok(BandedOperator::embed(
                src,
                dst,
                stride,
                offset,
                Arc::new(|_| C64::new(1.0, 0.0)),
            )?)
        }
        "diagonal" => {
            let set = set_of(
                rest.first()
                    .ok_or_else(|| anyhow!("diagonal needs a space"))?,
            )?;
            let sym_kind = rest
                .get(1)
                .ok_or_else(|| anyhow!("diagonal needs a symbol kind"))?;
            let symbol = diagonal_symbol(sym_kind, &rest[2..])?;
            if *sym_kind == "table" {
                let dim = set
                    .dim()
                    .ok_or_else(|| anyhow!("table diagonal needs a finite index set"))?;
                if rest[2..].len() != dim {
                    bail!(
                        "table has {} entries for a set of dimension {dim}",
                        rest[2..].len()
                    );
                }
            }
            Ok(BandedOperator::diagonal(set, symbol))
        }
        "dense" => {
            let src = set_of(
                rest.first()
                    .ok_or_else(|| anyhow!("dense needs a domain"))?,
            )?;
            let dst = set_of(
                rest.get(1)
                    .ok_or_else(|| anyhow!("dense needs a codomain"))?,
            )?;
            let rows: usize = need_kv(&rest[2..], "rows")?.parse()?;
            let cols: usize = need_kv(&rest[2..], "cols")?.parse()?;
            let values: Vec<C64> = rest[2..]
                .iter()
                .filter(|t| t.starts_with('('))
                .map(|t| parse_complex(t))
                .collect::<Result<_>>()?;
            if values.len() != rows * cols {
                bail!(
                    "dense block needs {} entries, got {}",
                    rows * cols,
                    values.len()
                );
            }
            let mut m = boplab_core::opcore::DenseMatrix::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    m.set(r, c, values[r * cols + c]);
                }
            }
            Ok(BandedOperator::dense(src, dst, &m)?)
        }
        "compose" => {
            let a = op_of(
                rest.first()
                    .ok_or_else(|| anyhow!("compose needs two ops"))?,
            )?;
            let b = op_of(
                rest.get(1)
                    .ok_or_else(|| anyhow!("compose needs two ops"))?,
            )?;
            Ok(a.compose(&b)?)
        }
        "sum" => {
            let a = op_of(rest.first().ok_or_else(|| anyhow!("sum needs two ops"))?)?;
            let b = op_of(rest.get(1).ok_or_else(|| anyhow!("sum needs two ops"))?)?;
            Ok(a.add(&b)?)
        }
        "scaled" => {
            let a = op_of(rest.first().ok_or_else(|| anyhow!("scaled needs an op"))?)?;
            let factor = parse_complex(
                rest.get(1)
                    .ok_or_else(|| anyhow!("scaled needs a factor"))?,
            )?;
            Ok(a.scale(factor))
        }
        "adjoint" => {
            let a = op_of(rest.first().ok_or_else(|| anyhow!("adjoint needs an op"))?)?;
            Ok(a.adjoint())
        }
        "zero" => {
            let src = set_of(rest.first().ok_or_else(|| anyhow!("zero needs a domain"))?)?;
            let dst = set_of(
                rest.get(1)
                    .ok_or_else(|| anyhow!("zero needs a codomain"))?,
            )?;
            Ok(BandedOperator::zero(src, dst))
        }
        "identity" => {
            let set = set_of(
                rest.first()
                    .ok_or_else(|| anyhow!("identity needs a space"))?,
            )?;
            Ok(BandedOperator::identity(set))
        }
        other => bail!("unknown op kind {other}"),
    }
}

fn build_cert(
    tokens: &[&str],
    ops: &BTreeMap<String, BandedOperator>,
) -> Result<StructuralCertificate> {
    match tokens[0] {
        "shift-isometry" => {
            let sided = match tokens.get(1) {
                Some(&"one-sided") => Sided::One,
                Some(&"two-sided") => Sided::Two,
                other => bail!("shift-isometry needs one-sided|two-sided, got {other:?}"),
            };
            Ok(StructuralCertificate::ShiftIsometry { sided })
        }
        "norm-bound" => Ok(StructuralCertificate::NormBound(
            tokens
                .get(1)
                .ok_or_else(|| anyhow!("norm-bound needs a value"))?
                .parse()?,
        )),
        "spectral-radius-bound" => Ok(StructuralCertificate::SpectralRadiusBound(
            tokens
                .get(1)
                .ok_or_else(|| anyhow!("spectral-radius-bound needs a value"))?
                .parse()?,
        )),
        "power-bounded" => Ok(StructuralCertificate::PowerBounded {
            bound: tokens
                .get(1)
                .ok_or_else(|| anyhow!("power-bounded needs a value"))?
                .parse()?,
        }),
        "normal" => Ok(StructuralCertificate::Normal),
        "injective" => Ok(StructuralCertificate::Injective),
        "nilpotent" => Ok(StructuralCertificate::Nilpotent {
            degree: tokens
                .get(1)
                .ok_or_else(|| anyhow!("nilpotent needs a degree"))?
                .parse()?,
        }),
        "analytic" => Ok(StructuralCertificate::Analytic {
            justification: tokens[1..].join(" "),
        }),
        "diagonal-of" => {
            // diagonal-of <op> sup=<f> sup-limit=<f> inf-nonzero=<f> [const=(re,im)]
            let name = tokens
                .get(1)
                .ok_or_else(|| anyhow!("diagonal-of needs an op name"))?;
            let op = ops
                .get(*name)
                .cloned()
                .ok_or_else(|| anyhow!("diagonal-of references unknown op {name}"))?;
            let symbol: CoefFn =
                Arc::new(move |k| op.diagonal_entry(k).unwrap_or(C64::new(0.0, 0.0)));
            let sup_abs: f64 = need_kv(&tokens[2..], "sup")?.parse()?;
            let sup_abs_limit: f64 = need_kv(&tokens[2..], "sup-limit")?.parse()?;
            let inf_abs_nonzero: f64 = need_kv(&tokens[2..], "inf-nonzero")?.parse()?;
            let constant = tokens[2..]
                .iter()
                .find_map(|t| kv(t, "const"))
                .map(parse_complex)
                .transpose()?;
            Ok(StructuralCertificate::DiagonalSymbol(SymbolInfo {
                symbol,
                sup_abs,
                sup_abs_limit,
                inf_abs_nonzero,
                constant,
            }))
        }
        other => bail!("unknown certificate kind {other}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec_parses_and_validates() {
        let text = "\
bspec 1
name smoke
index h1 half-line
index h2 finite 0 1
op V shift h1 stride=2 offset=2
op W shift h2 -> h1 stride=2 offset=1
op D diagonal h2 table (0.5,0) (0.25,0)
op E compose W D
op X diagonal h2 table (0.1,0) (0.2,0)
block V V
block E E
block X X
cert V shift-isometry one-sided
horizon 64
tol 1e-8
";
        let built = parse(text).unwrap();
        assert_eq!(built.name, "smoke");
        assert_eq!(built.horizon, 64);
        let report = built.operator.validate(16, 1e-10).unwrap();
        assert!(report.passed(), "{report}");
        built.facts.verify(&built.operator, 8, 1e-10).unwrap();
        assert!(!built.wot_dictionary.is_empty());
    }

    #[test]
    fn complex_literals_roundtrip() {
        for z in [
            C64::new(1.0, 0.0),
            C64::new(-0.5, 3f64.sqrt() / 2.0),
            C64::new(6.123233995736766e-17, -1.0),
        ] {
            let text = format_complex(z);
            assert_eq!(parse_complex(&text).unwrap(), z, "{text}");
        }
    }

    #[test]
    fn unknown_directives_are_rejected_with_line_numbers() {
        let text = "bspec 1\nindex h1 half-line\nfrobnicate yes\n";
        let err = match parse(text) {
            Err(e) => e.to_string(),
            Ok(_) => panic!("expected a parse error"),
        };
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn unresolved_references_fail() {
        let text = "\
bspec 1
index h1 half-line
op V shift h1
block V V
block E MISSING
block X V
";
        assert!(parse(text).is_err());
    }
}
