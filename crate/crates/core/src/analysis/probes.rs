//! Horizon-limited numerical stand-ins for WOT/SOT limits of power
//! sequences. Verdicts carry their horizon and never claim infinite-time
//! truth; deciding that is the theorem engine's job.

use crate::boperator::{BOperator, BlockVector};
use crate::error::{CoreError, Result};
use crate::opcore::{BandedOperator, SupportVector, C64};
use crate::CLUSTER_SEPARATION_FACTOR;

/// Anything whose power orbit can be probed.
pub trait ProbeTarget {
    type Vector: Clone;

    fn forward(&self, v: &Self::Vector) -> Result<Self::Vector>;
    fn backward(&self, v: &Self::Vector) -> Result<Self::Vector>;
    fn pair(f: &Self::Vector, g: &Self::Vector) -> Result<C64>;
    fn distance(a: &Self::Vector, b: &Self::Vector) -> Result<f64>;
    fn magnitude(v: &Self::Vector) -> f64;
}

impl ProbeTarget for BandedOperator {
    type Vector = SupportVector;

    fn forward(&self, v: &SupportVector) -> Result<SupportVector> {
        self.apply(v)
    }

    fn backward(&self, v: &SupportVector) -> Result<SupportVector> {
        self.adjoint().apply(v)
    }

    fn pair(f: &SupportVector, g: &SupportVector) -> Result<C64> {
        f.inner(g)
    }

    fn distance(a: &SupportVector, b: &SupportVector) -> Result<f64> {
        Ok(a.sub(b)?.norm())
    }

    fn magnitude(v: &SupportVector) -> f64 {
        v.norm()
    }
}

impl ProbeTarget for BOperator {
    type Vector = BlockVector;

    fn forward(&self, v: &BlockVector) -> Result<BlockVector> {
        self.apply(v)
    }

    fn backward(&self, v: &BlockVector) -> Result<BlockVector> {
        self.apply_adjoint(v)
    }

    fn pair(f: &BlockVector, g: &BlockVector) -> Result<C64> {
        f.inner(g)
    }

    fn distance(a: &BlockVector, b: &BlockVector) -> Result<f64> {
        Ok(a.sub(b)?.norm())
    }

    fn magnitude(v: &BlockVector) -> f64 {
        v.norm()
    }
}

/// Probes the adjoint's orbit: forward means applying T*.
pub struct AdjointAction<'a>(pub &'a BOperator);

impl ProbeTarget for AdjointAction<'_> {
    type Vector = BlockVector;

    fn forward(&self, v: &BlockVector) -> Result<BlockVector> {
        self.0.apply_adjoint(v)
    }

    fn backward(&self, v: &BlockVector) -> Result<BlockVector> {
        self.0.apply(v)
    }

    fn pair(f: &BlockVector, g: &BlockVector) -> Result<C64> {
        f.inner(g)
    }

    fn distance(a: &BlockVector, b: &BlockVector) -> Result<f64> {
        Ok(a.sub(b)?.norm())
    }

    fn magnitude(v: &BlockVector) -> f64 {
        v.norm()
    }
}

/// A value attained by the probed sequence, with its multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub value: C64,
    pub count: u32,
}

/// Concrete evidence of non-convergence: two separated values of one probe,
/// re-evaluable at the recorded power indices.
#[derive(Debug, Clone)]
pub struct Witness {
    pub probe: usize,
    pub n: u32,
    pub m: u32,
    pub value_n: C64,
    pub value_m: C64,
    pub separation: f64,
}

#[derive(Debug, Clone)]
pub enum ProbeStatus {
    Converged { limit: C64 },
    NotConverged { witness: Witness },
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Converged,
    NotConverged,
    Inconclusive,
}

/// Per-probe diagnostics: the probed series and its cluster structure.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub label: String,
    pub status: ProbeStatus,
    pub series: Vec<(u32, C64)>,
    pub clusters: Vec<Cluster>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceVerdict {
    pub status: VerdictStatus,
    pub probes: Vec<ProbeReport>,
    pub horizon: u32,
    pub tol: f64,
}

impl ConvergenceVerdict {
    pub fn witness(&self) -> Option<&Witness> {
        self.probes.iter().find_map(|p| match &p.status {
            ProbeStatus::NotConverged { witness } => Some(witness),
            _ => None,
        })
    }

    pub fn limits(&self) -> Vec<Option<C64>> {
        self.probes
            .iter()
            .map(|p| match &p.status {
                ProbeStatus::Converged { limit } => Some(*limit),
                _ => None,
            })
            .collect()
    }
}

/// Evaluates `⟨T^n f, g⟩` for n ≤ horizon on every dictionary pair, through
/// the adjoint orbit `⟨f, T*^n g⟩` so index growth follows g rather than f.
pub fn wot_probe<T: ProbeTarget>(
    op: &T,
    dictionary: &[(T::Vector, T::Vector)],
    horizon: u32,
    tol: f64,
) -> Result<ConvergenceVerdict> {
    if horizon < 4 {
        return Err(CoreError::InvalidParameter(
            "probe horizon must be >= 4".into(),
        ));
    }
    let mut probes = Vec::with_capacity(dictionary.len());
    for (idx, (f, g)) in dictionary.iter().enumerate() {
        let mut series: Vec<(u32, C64)> = Vec::with_capacity(horizon as usize);
        let mut back = g.clone();
        for n in 1..=horizon {
            back = match op.backward(&back) {
                Ok(v) => v,
                Err(CoreError::IndexOverflow) => break,
                Err(e) => return Err(e),
            };
            series.push((n, T::pair(f, &back)?));
        }
        probes.push(analyze_scalar_series(
            idx,
            format!("pair{idx}"),
            series,
            tol,
        ));
    }
    Ok(summarize(probes, horizon, tol))
}

/// Cauchy analysis of `T^n f` in norm for n ≤ horizon.
///
/// The returned limit iterates (one per probe, when converged) expose the
/// limit's action for follow-up checks.
pub fn sot_probe<T: ProbeTarget>(
    op: &T,
    probes: &[T::Vector],
    horizon: u32,
    tol: f64,
) -> Result<(ConvergenceVerdict, Vec<Option<T::Vector>>)> {
    if horizon < 4 {
        return Err(CoreError::InvalidParameter(
            "probe horizon must be >= 4".into(),
        ));
    }
    let sep = CLUSTER_SEPARATION_FACTOR * tol;
    let mut reports = Vec::with_capacity(probes.len());
    let mut limits = Vec::with_capacity(probes.len());
    for (idx, f) in probes.iter().enumerate() {
        let mut orbit: Vec<T::Vector> = Vec::with_capacity(horizon as usize);
        let mut cur = f.clone();
        for _ in 1..=horizon {
            cur = match op.forward(&cur) {
                Ok(v) => v,
                Err(CoreError::IndexOverflow) => break,
                Err(e) => return Err(e),
            };
            orbit.push(cur.clone());
        }
        let reached = orbit.len() as u32;
        // Diagnostics: the norm sequence ||T^n f||.
        let series: Vec<(u32, C64)> = orbit
            .iter()
            .enumerate()
            .map(|(i, v)| (i as u32 + 1, C64::new(T::magnitude(v), 0.0)))
            .collect();
        if reached < 4 {
            reports.push(ProbeReport {
                label: format!("probe{idx}"),
                status: ProbeStatus::Inconclusive,
                series,
                clusters: Vec::new(),
            });
            limits.push(None);
            continue;
        }
        let tail_start = (3 * reached / 4).max(1) as usize - 1;
        let tail = &orbit[tail_start..];
        let mut max_diff: f64 = 0.0;
        let mut witness: Option<Witness> = None;
        for (a_off, a) in tail.iter().enumerate() {
            for (b_off, b) in tail.iter().enumerate().skip(a_off + 1) {
                let d = T::distance(a, b)?;
                if d > max_diff {
                    max_diff = d;
                    if d > sep {
                        witness = Some(Witness {
                            probe: idx,
                            n: (tail_start + a_off) as u32 + 1,
                            m: (tail_start + b_off) as u32 + 1,
                            value_n: C64::new(d, 0.0),
                            value_m: C64::new(0.0, 0.0),
                            separation: d,
                        });
                    }
                }
            }
        }
        if max_diff <= tol {
            reports.push(ProbeReport {
                label: format!("probe{idx}"),
                status: ProbeStatus::Converged {
                    limit: C64::new(0.0, 0.0),
                },
                series,
                clusters: Vec::new(),
            });
            limits.push(Some(orbit.last().unwrap().clone()));
        } else if let Some(w) = witness {
            reports.push(ProbeReport {
                label: format!("probe{idx}"),
                status: ProbeStatus::NotConverged { witness: w },
                series,
                clusters: Vec::new(),
            });
            limits.push(None);
        } else {
            reports.push(ProbeReport {
                label: format!("probe{idx}"),
                status: ProbeStatus::Inconclusive,
                series,
                clusters: Vec::new(),
            });
            limits.push(None);
        }
    }
    Ok((summarize(reports, horizon, tol), limits))
}

fn analyze_scalar_series(
    probe_idx: usize,
    label: String,
    series: Vec<(u32, C64)>,
    tol: f64,
) -> ProbeReport {
    let sep = CLUSTER_SEPARATION_FACTOR * tol;
    if series.len() < 4 {
        return ProbeReport {
            label,
            status: ProbeStatus::Inconclusive,
            series,
            clusters: vec![],
        };
    }
    let reached = series.len();
    let tail_start = (3 * reached / 4).max(1) - 1;
    let tail = &series[tail_start..];
    let mut spread: f64 = 0.0;
    for (i, &(_, a)) in tail.iter().enumerate() {
        for &(_, b) in tail.iter().skip(i + 1) {
            spread = spread.max((a - b).norm());
        }
    }
    let clusters = cluster_values(&series, sep);
    if spread <= tol {
        let mean = tail.iter().map(|&(_, v)| v).sum::<C64>() / tail.len() as f64;
        return ProbeReport {
            label,
            status: ProbeStatus::Converged { limit: mean },
            series,
            clusters,
        };
    }
    // Not settled: look for two separated values recurring in the tail.
    let mut witness: Option<Witness> = None;
    'outer: for (i, &(n, a)) in tail.iter().enumerate() {
        for &(m, b) in tail.iter().skip(i + 1) {
            if (a - b).norm() > sep {
                witness = Some(Witness {
                    probe: probe_idx,
                    n,
                    m,
                    value_n: a,
                    value_m: b,
                    separation: (a - b).norm(),
                });
                break 'outer;
            }
        }
    }
    match witness {
        Some(w) => ProbeReport {
            label,
            status: ProbeStatus::NotConverged { witness: w },
            series,
            clusters,
        },
        None => ProbeReport {
            label,
            status: ProbeStatus::Inconclusive,
            series,
            clusters,
        },
    }
}

/// Deterministic single-linkage clustering in the plane: values within
/// `sep` of an existing cluster member join it; clusters reachable through
/// chains merge. Representatives are centroids, ordered lexicographically.
pub fn cluster_values(series: &[(u32, C64)], sep: f64) -> Vec<Cluster> {
    let values: Vec<C64> = series.iter().map(|&(_, v)| v).collect();
    if values.is_empty() {
        return Vec::new();
    }
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    // Sort by real part so the pair scan can stop early.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        (values[a].re, values[a].im)
            .partial_cmp(&(values[b].re, values[b].im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for (pos, &i) in order.iter().enumerate() {
        for &j in order.iter().skip(pos + 1) {
            if values[j].re - values[i].re > sep {
                break;
            }
            if (values[i] - values[j]).norm() <= sep {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<C64>> = std::collections::BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(values[i]);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_values()
        .map(|members| {
            let count = members.len() as u32;
            let value = members.iter().sum::<C64>() / members.len() as f64;
            Cluster { value, count }
        })
        .collect();
    clusters.sort_by(|a, b| {
        (a.value.re, a.value.im)
            .partial_cmp(&(b.value.re, b.value.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    clusters
}

fn summarize(probes: Vec<ProbeReport>, horizon: u32, tol: f64) -> ConvergenceVerdict {
    let status = if probes
        .iter()
        .any(|p| matches!(p.status, ProbeStatus::NotConverged { .. }))
    {
        VerdictStatus::NotConverged
    } else if probes
        .iter()
        .all(|p| matches!(p.status, ProbeStatus::Converged { .. }))
    {
        VerdictStatus::Converged
    } else {
        VerdictStatus::Inconclusive
    };
    ConvergenceVerdict {
        status,
        probes,
        horizon,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{IndexSet, SupportVector};
    use std::sync::Arc;

    fn basis(set: IndexSet, k: i128) -> SupportVector {
        SupportVector::basis(set, k).unwrap()
    }

    #[test]
    fn bilateral_shift_pairings_vanish_exactly() {
        let u = BandedOperator::shift(IndexSet::FullLine, 1);
        let dict = vec![(basis(IndexSet::FullLine, 5), basis(IndexSet::FullLine, 0))];
        // ⟨U^n e_j, e_k⟩ = 0 once n > k - j; here it is 0 for every n >= 1
        // except n = -5 which never occurs.
        let verdict = wot_probe(&u, &dict, 64, 1e-8).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Converged);
        let limit = verdict.limits()[0].unwrap();
        assert_eq!(limit, C64::new(0.0, 0.0));
    }

    #[test]
    fn bilateral_shift_hits_the_offset_once() {
        let u = BandedOperator::shift(IndexSet::FullLine, 1);
        let f = basis(IndexSet::FullLine, 0);
        let g = basis(IndexSet::FullLine, 5);
        let dict = vec![(f, g)];
        let verdict = wot_probe(&u, &dict, 64, 1e-8).unwrap();
        // value 1 at n = 5, 0 everywhere else; tail converged to 0.
        assert_eq!(verdict.status, VerdictStatus::Converged);
        let at5 = verdict.probes[0]
            .series
            .iter()
            .find(|&&(n, _)| n == 5)
            .unwrap()
            .1;
        assert_eq!(at5, C64::new(1.0, 0.0));
        for &(n, v) in &verdict.probes[0].series {
            if n != 5 {
                assert_eq!(v, C64::new(0.0, 0.0), "n={n}");
            }
        }
    }

    #[test]
    fn alternating_diagonal_produces_two_clusters() {
        let d = BandedOperator::diagonal(IndexSet::HalfLine, Arc::new(|_| C64::new(-1.0, 0.0)));
        let f = basis(IndexSet::HalfLine, 0);
        let dict = vec![(f.clone(), f)];
        let verdict = wot_probe(&d, &dict, 100, 1e-8).unwrap();
        assert_eq!(verdict.status, VerdictStatus::NotConverged);
        assert_eq!(verdict.probes[0].clusters.len(), 2);
        let w = verdict.witness().unwrap();
        assert!(w.separation > 1.9);
        // Witness re-evaluates: ⟨(-1)^n e0, e0⟩.
        let expect_n = if w.n % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(w.value_n, C64::new(expect_n, 0.0));
    }

    #[test]
    fn shift_orbit_is_not_sot_cauchy() {
        let s = BandedOperator::shift(IndexSet::HalfLine, 1);
        let (verdict, _) = sot_probe(&s, &[basis(IndexSet::HalfLine, 0)], 64, 1e-8).unwrap();
        assert_eq!(verdict.status, VerdictStatus::NotConverged);
        // ||S^n e0 - S^m e0||² = 2 for n != m.
        let w = verdict.witness().unwrap();
        assert!((w.separation - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn contractive_diagonal_is_sot_convergent_with_fixed_part() {
        let d = BandedOperator::diagonal(
            IndexSet::HalfLine,
            Arc::new(|k| {
                if k == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.5, 0.0)
                }
            }),
        );
        let f = SupportVector::from_entries(
            IndexSet::HalfLine,
            [(0, C64::new(1.0, 0.0)), (1, C64::new(1.0, 0.0))],
        )
        .unwrap();
        let (verdict, limits) = sot_probe(&d, &[f], 96, 1e-8).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Converged);
        let lim = limits[0].as_ref().unwrap();
        assert!((lim.get(0) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(lim.get(1).norm() < 1e-8);
    }

    #[test]
    fn identity_converges_immediately() {
        let id = BandedOperator::identity(IndexSet::HalfLine);
        let (verdict, _) = sot_probe(&id, &[basis(IndexSet::HalfLine, 3)], 16, 1e-10).unwrap();
        assert_eq!(verdict.status, VerdictStatus::Converged);
    }

    #[test]
    fn cluster_counting_is_exact_for_roots_of_unity() {
        let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
        let series: Vec<(u32, C64)> = (1..=300).map(|n| (n, omega.powu(n))).collect();
        let clusters = cluster_values(&series, 1e-7);
        assert_eq!(clusters.len(), 3);
        for c in &clusters {
            assert_eq!(c.count, 100);
        }
    }
}
