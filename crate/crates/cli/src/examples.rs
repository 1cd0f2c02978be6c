//! Spec-file emitters for the gallery constructors. Emitted files rebuild
//! the same operators (floats are printed shortest-roundtrip), so every
//! other command can re-ingest them unchanged.

use std::f64::consts::PI;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use num_complex::Complex64 as C64;

use crate::specfile::format_complex;
use boplab_core::gallery::DiscreteMeasure;

pub const EXAMPLE_NAMES: &[&str] = &[
    "mth-roots",
    "irrational-rotation",
    "bilateral-shift",
    "b-isometry",
    "b-normal-tz",
    "nitclyst",
    "remark-nycuxa",
    "tttp",
];

#[derive(Debug, Clone)]
pub struct ExampleParams {
    pub m: u32,
    pub multiplicity: u32,
    pub theta: f64,
    pub sigma: f64,
    pub variant: String,
    pub atoms: usize,
    pub z: C64,
    pub w: C64,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams {
            m: 3,
            multiplicity: 2,
            theta: (5f64.sqrt() - 1.0) / 2.0,
            sigma: 1.0,
            variant: "quasi".into(),
            atoms: 32,
            z: C64::new(1.0, 0.0),
            w: C64::new(0.5, 0.0),
        }
    }
}

pub fn emit(name: &str, p: &ExampleParams) -> Result<String> {
    match name {
        "mth-roots" => mth_roots(p.m, p.multiplicity),
        "irrational-rotation" => irrational_rotation(p.theta),
        "bilateral-shift" => Ok(bilateral_shift()),
        "b-isometry" => b_isometry(p.sigma, &p.variant),
        "b-normal-tz" => b_normal_tz(p.z),
        "nitclyst" => nitclyst(p.atoms),
        "remark-nycuxa" => remark_nycuxa(p.z, p.w),
        "tttp" => Ok(tttp()),
        other => bail!(
            "unknown example {other}; available: {}",
            EXAMPLE_NAMES.join(", ")
        ),
    }
}

/// Bare unitaries are embedded as the block-diagonal triple [U 0; 0 0] with
/// a one-dimensional lower space, so every command applies.
fn unitary_preamble(out: &mut String, name: &str, h1: &str) {
    let _ = writeln!(out, "bspec 1");
    let _ = writeln!(out, "name {name}");
    let _ = writeln!(out, "index h1 {h1}");
    let _ = writeln!(out, "index h2 finite 0 0");
}

fn unitary_tail(out: &mut String) {
    let _ = writeln!(out, "op E0 zero h2 h1");
    let _ = writeln!(out, "op X0 zero h2 h2");
    let _ = writeln!(out, "block V U");
    let _ = writeln!(out, "block E E0");
    let _ = writeln!(out, "block X X0");
}

fn mth_roots(m: u32, multiplicity: u32) -> Result<String> {
    if m == 0 || multiplicity == 0 {
        bail!("mth-roots needs m >= 1 and multiplicity >= 1");
    }
    let dim = m * multiplicity;
    let mut out = String::new();
    unitary_preamble(
        &mut out,
        &format!("mth-roots m={m} mult={multiplicity}"),
        &format!("finite 0 {}", dim - 1),
    );
    writeln!(out, "op U diagonal h1 roots m={m}")?;
    unitary_tail(&mut out);
    let constant = if m == 1 { " const=(1,0)" } else { "" };
    writeln!(
        out,
        "cert V diagonal-of U sup=1 sup-limit=1 inf-nonzero=1{constant}"
    )?;
    let probe = if m >= 2 { 1 } else { 0 };
    writeln!(out, "probe wot top {probe} top {probe}")?;
    writeln!(out, "probe wot top 0 top 0")?;
    writeln!(out, "horizon 300")?;
    Ok(out)
}

fn irrational_rotation(theta: f64) -> Result<String> {
    let angle = 2.0 * PI * theta;
    let z = C64::new(angle.cos(), angle.sin());
    let mut out = String::new();
    unitary_preamble(
        &mut out,
        &format!("irrational-rotation theta={theta}"),
        "half-line",
    );
    writeln!(out, "op U diagonal h1 const {}", format_complex(z))?;
    unitary_tail(&mut out);
    writeln!(
        out,
        "cert V diagonal-of U sup=1 sup-limit=1 inf-nonzero=1 const={}",
        format_complex(z)
    )?;
    writeln!(out, "probe wot top 0 top 0")?;
    writeln!(out, "horizon 500")?;
    Ok(out)
}

fn bilateral_shift() -> String {
    let mut out = String::new();
    unitary_preamble(&mut out, "bilateral-shift", "full-line");
    let _ = writeln!(out, "op U shift h1 stride=1 offset=1");
    unitary_tail(&mut out);
    let _ = writeln!(out, "cert V shift-isometry two-sided");
    let _ = writeln!(out, "probe wot top 0 top 0");
    let _ = writeln!(out, "probe wot top 0 top 5");
    let _ = writeln!(out, "probe wot top -2 top 0");
    let _ = writeln!(out, "horizon 256");
    out
}

fn b_isometry(sigma: f64, variant: &str) -> Result<String> {
    if sigma < 0.0 {
        bail!("sigma must be >= 0");
    }
    let s = format_complex(C64::new(sigma, 0.0));
    let mut out = String::new();
    writeln!(out, "bspec 1")?;
    writeln!(out, "name b-isometry sigma={sigma} variant={variant}")?;
    match variant {
        "quasi" => {
            writeln!(out, "index h1 half-line")?;
            writeln!(out, "index h2 half-line")?;
            writeln!(out, "op V shift h1 stride=2 offset=2")?;
            writeln!(out, "op W shift h2 -> h1 stride=2 offset=1")?;
            writeln!(out, "op E scaled W {s}")?;
            writeln!(out, "op X shift h2 stride=1 offset=1")?;
            writeln!(out, "cert X shift-isometry one-sided")?;
        }
        "brownian" => {
            writeln!(out, "index h1 full-line")?;
            writeln!(out, "index h2 full-line")?;
            writeln!(out, "op SP shift h1 stride=2 offset=2")?;
            writeln!(out, "op MP diagonal h1 halfspace pos scale=(1,0)")?;
            writeln!(out, "op VP compose SP MP")?;
            writeln!(out, "op SN shift h1 stride=2 offset=-1")?;
            writeln!(out, "op MN diagonal h1 halfspace neg scale=(1,0)")?;
            writeln!(out, "op VN compose SN MN")?;
            writeln!(out, "op V sum VP VN")?;
            writeln!(out, "op WP0 shift h2 -> h1 stride=2 offset=1")?;
            writeln!(out, "op WP compose WP0 MP")?;
            writeln!(out, "op WN0 shift h2 -> h1 stride=2 offset=0")?;
            writeln!(out, "op WN compose WN0 MN")?;
            writeln!(out, "op W sum WP WN")?;
            writeln!(out, "op E scaled W {s}")?;
            writeln!(out, "op X shift h2 stride=1 offset=1")?;
            writeln!(out, "cert X shift-isometry two-sided")?;
        }
        other => bail!("unknown variant {other}; expected quasi or brownian"),
    }
    writeln!(out, "op ME diagonal h2 const {s}")?;
    writeln!(out, "block V V")?;
    writeln!(out, "block E E")?;
    writeln!(out, "block X X")?;
    writeln!(out, "cert V shift-isometry one-sided")?;
    writeln!(out, "cert E norm-bound {sigma}")?;
    if sigma > 0.0 {
        writeln!(out, "cert E injective")?;
    }
    writeln!(
        out,
        "cert |E| diagonal-of ME sup={sigma} sup-limit={sigma} inf-nonzero={sigma} const={s}"
    )?;
    writeln!(out, "horizon 256")?;
    Ok(out)
}

fn b_normal_tz(z: C64) -> Result<String> {
    if z.norm() == 0.0 || z.norm() >= 1.0 {
        bail!("b-normal-tz needs 0 < |z| < 1");
    }
    let theta = (5f64.sqrt() - 1.0) / 2.0;
    let r = z.norm();
    let mut out = String::new();
    writeln!(out, "bspec 1")?;
    writeln!(out, "name b-normal-tz z={}", format_complex(z))?;
    writeln!(out, "index h1 half-line")?;
    writeln!(out, "index h2 half-line")?;
    writeln!(out, "op V shift h1 stride=2 offset=2")?;
    writeln!(out, "op E shift h2 -> h1 stride=2 offset=1")?;
    writeln!(
        out,
        "op X diagonal h2 rotation theta={theta} scale={}",
        format_complex(z)
    )?;
    writeln!(out, "op ME diagonal h2 const (1,0)")?;
    writeln!(out, "block V V")?;
    writeln!(out, "block E E")?;
    writeln!(out, "block X X")?;
    writeln!(out, "cert V shift-isometry one-sided")?;
    writeln!(
        out,
        "cert X diagonal-of X sup={r} sup-limit={r} inf-nonzero={r}"
    )?;
    writeln!(out, "cert X normal")?;
    writeln!(out, "cert X norm-bound {r}")?;
    writeln!(out, "cert X spectral-radius-bound {r}")?;
    writeln!(out, "cert E norm-bound 1")?;
    writeln!(out, "cert E injective")?;
    writeln!(
        out,
        "cert |E| diagonal-of ME sup=1 sup-limit=1 inf-nonzero=1 const=(1,0)"
    )?;
    writeln!(out, "horizon 256")?;
    Ok(out)
}

fn nitclyst(atoms: usize) -> Result<String> {
    let measure = DiscreteMeasure::planar_lebesgue_radial(atoms)?;
    let radii: Vec<f64> = measure.atoms().iter().map(|a| a.norm()).collect();
    let phi: Vec<f64> = radii.iter().map(|r| r.sqrt()).collect();
    let psi: Vec<f64> = radii.iter().map(|r| (1.0 - r).sqrt()).collect();
    let fmt_table = |vals: &[f64]| {
        vals.iter()
            .map(|v| format!("({v},0)"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let sup_phi = phi.iter().cloned().fold(0.0f64, f64::max);
    let inf_phi = phi
        .iter()
        .cloned()
        .filter(|v| *v > 0.0)
        .fold(1.0f64, f64::min);
    let sup_psi = psi.iter().cloned().fold(0.0f64, f64::max);
    let mut out = String::new();
    writeln!(out, "bspec 1")?;
    writeln!(out, "name nitclyst atoms={atoms}")?;
    writeln!(out, "index h1 half-line")?;
    writeln!(out, "index h2 finite 0 {}", atoms - 1)?;
    writeln!(out, "op V shift h1 stride=2 offset=2")?;
    writeln!(out, "op W shift h2 -> h1 stride=2 offset=1")?;
    writeln!(out, "op PSI diagonal h2 table {}", fmt_table(&psi))?;
    writeln!(out, "op PHI diagonal h2 table {}", fmt_table(&phi))?;
    writeln!(out, "op E compose W PSI")?;
    writeln!(out, "block V V")?;
    writeln!(out, "block E E")?;
    writeln!(out, "block X PHI")?;
    writeln!(out, "cert V shift-isometry one-sided")?;
    writeln!(
        out,
        "cert X diagonal-of PHI sup={sup_phi} sup-limit=1 inf-nonzero={inf_phi}"
    )?;
    writeln!(out, "cert X normal")?;
    writeln!(out, "cert X norm-bound 1")?;
    writeln!(out, "cert E injective")?;
    writeln!(
        out,
        "cert |E| diagonal-of PSI sup={sup_psi} sup-limit=1 inf-nonzero=0"
    )?;
    writeln!(out, "horizon 512")?;
    Ok(out)
}

fn remark_nycuxa(z: C64, w: C64) -> Result<String> {
    if z.norm() == 0.0 {
        bail!("z must be nonzero");
    }
    if w.norm() == 0.0 || w.norm() >= 1.0 {
        bail!("w must satisfy 0 < |w| < 1");
    }
    let (az, aw) = (z.norm(), w.norm());
    let mut out = String::new();
    writeln!(out, "bspec 1")?;
    writeln!(
        out,
        "name remark-nycuxa z={} w={}",
        format_complex(z),
        format_complex(w)
    )?;
    writeln!(out, "index h1 half-line")?;
    writeln!(out, "index h2 half-line")?;
    writeln!(out, "op V shift h1 stride=2 offset=2")?;
    writeln!(out, "op W1 shift h2 -> h1 stride=2 offset=1")?;
    writeln!(out, "op E scaled W1 {}", format_complex(z))?;
    writeln!(out, "op S shift h2 stride=1 offset=1")?;
    writeln!(out, "op X scaled S {}", format_complex(w))?;
    writeln!(out, "op ME diagonal h2 const ({az},0)")?;
    writeln!(out, "op MX diagonal h2 const ({aw},0)")?;
    writeln!(out, "block V V")?;
    writeln!(out, "block E E")?;
    writeln!(out, "block X X")?;
    writeln!(out, "cert V shift-isometry one-sided")?;
    writeln!(out, "cert X norm-bound {aw}")?;
    writeln!(out, "cert X spectral-radius-bound {aw}")?;
    writeln!(out, "cert X power-bounded 1")?;
    writeln!(out, "cert X injective")?;
    writeln!(
        out,
        "cert X analytic nonzero multiple of a completely non-unitary shift"
    )?;
    writeln!(out, "cert E norm-bound {az}")?;
    writeln!(out, "cert E injective")?;
    writeln!(
        out,
        "cert |E| diagonal-of ME sup={az} sup-limit={az} inf-nonzero={az} const=({az},0)"
    )?;
    writeln!(
        out,
        "cert |X| diagonal-of MX sup={aw} sup-limit={aw} inf-nonzero={aw} const=({aw},0)"
    )?;
    writeln!(out, "horizon 256")?;
    Ok(out)
}

fn tttp() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "bspec 1");
    let _ = writeln!(out, "name tttp");
    let _ = writeln!(out, "index h1 half-line");
    let _ = writeln!(out, "index h2 half-line");
    let _ = writeln!(out, "op SP shift h1 stride=2 offset=2");
    let _ = writeln!(out, "op MP diagonal h1 indicator mod=2 res=0 scale=(1,0)");
    let _ = writeln!(out, "op VP compose SP MP");
    let _ = writeln!(out, "op SN shift h1 stride=2 offset=1");
    let _ = writeln!(out, "op MN diagonal h1 indicator mod=2 res=1 scale=(1,0)");
    let _ = writeln!(out, "op VN compose SN MN");
    let _ = writeln!(out, "op V sum VP VN");
    let _ = writeln!(out, "op E diagonal h2 indicator mod=4 res=0 scale=(1,0)");
    let _ = writeln!(out, "op DOWN shift h2 stride=1 offset=-2");
    let _ = writeln!(out, "op MX diagonal h2 recip mod=4 res=3");
    let _ = writeln!(out, "op X compose DOWN MX");
    let _ = writeln!(out, "block V V");
    let _ = writeln!(out, "block E E");
    let _ = writeln!(out, "block X X");
    let _ = writeln!(out, "cert V shift-isometry one-sided");
    let _ = writeln!(out, "cert X nilpotent 2");
    let _ = writeln!(out, "cert X spectral-radius-bound 0");
    let _ = writeln!(out, "cert X norm-bound 1");
    let _ = writeln!(
        out,
        "cert |E| diagonal-of E sup=1 sup-limit=1 inf-nonzero=1"
    );
    let _ = writeln!(
        out,
        "cert |X| diagonal-of MX sup=1 sup-limit=1 inf-nonzero=0"
    );
    let _ = writeln!(out, "horizon 128");
    out
}
