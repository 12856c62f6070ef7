//! Nonlinear relaxation labeling dynamics.
//!
//! Support `q_i(λ) = Σ_j Σ_μ r_ij(λ, μ) p_j(μ)`, multiplicative update
//! `p'_i(λ) = p_i(λ) q_i(λ) / Σ_μ p_i(μ) q_i(μ)`, and the average local
//! consistency `A = Σ_i Σ_λ p_i(λ) q_i(λ)`, which the update never decreases
//! when the coefficients are symmetric and non-negative.
//!
//! Coefficients are never materialized: `r_ij(λ, μ)` is the compatibility of
//! the two piece states when `μ` sits at the neighbor of `λ` in some relation,
//! and zero otherwise. Only the non-zero compatibilities of each
//! `(state, relation)` group are kept, so a support evaluation touches at most
//! four neighbor positions per label.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compatibility::CompatibilityTable;
use crate::error::{Error, Result};
use crate::labeling::Labeling;
use crate::problem::{ProblemInstance, Relation};
use crate::scalar::Scalar;

/// Sparse view of the coefficients `r_ij(λ, μ)` of an instance.
#[derive(Clone, Debug)]
pub struct CoefficientView<'a, T> {
    instance: &'a ProblemInstance,
    table: &'a CompatibilityTable<T>,
    /// `[state * 4 + R]` → non-zero `(neighbor state, C)` pairs.
    sparse: Vec<Vec<(u32, T)>>,
}

impl<'a, T: Scalar> CoefficientView<'a, T> {
    pub fn new(instance: &'a ProblemInstance, table: &'a CompatibilityTable<T>) -> Result<Self> {
        if table.pieces() != instance.n() || table.orientations() != instance.orientations() {
            return Err(Error::DimensionMismatch(format!(
                "table over {} pieces x {} orientations, instance has {} pieces x {} orientations",
                table.pieces(),
                table.orientations(),
                instance.n(),
                instance.orientations()
            )));
        }
        let states = table.states();
        let sparse = (0..states * 4)
            .into_par_iter()
            .map(|slot| {
                let (s, rel) = (slot / 4, Relation::from_index(slot % 4));
                (0..states)
                    .filter_map(|t| {
                        let c = table.get(s, t, rel);
                        (c != T::zero()).then_some((t as u32, c))
                    })
                    .collect()
            })
            .collect();
        Ok(CoefficientView {
            instance,
            table,
            sparse,
        })
    }

    pub fn instance(&self) -> &ProblemInstance {
        self.instance
    }

    pub fn table(&self) -> &CompatibilityTable<T> {
        self.table
    }

    /// Number of stored non-zero compatibilities.
    pub fn nonzeros(&self) -> usize {
        self.sparse.iter().map(Vec::len).sum()
    }

    /// Dense lookup of a single coefficient `r_ij(λ, μ)`.
    pub fn coefficient(&self, i: usize, lambda: usize, j: usize, mu: usize) -> T {
        if i == j {
            return T::zero();
        }
        let inst = self.instance;
        let k = inst.orientations();
        let (p, q) = (inst.label_position(lambda), inst.label_position(mu));
        let Some(rel) = Relation::ALL
            .iter()
            .copied()
            .find(|r| inst.neighbor_index(p)[r.index()] == Some(q))
        else {
            return T::zero();
        };
        self.table.get(i * k + lambda % k, j * k + mu % k, rel)
    }

    /// `q_i(λ)` for one entry.
    #[inline]
    pub fn support_at(&self, lab: &Labeling<T>, i: usize, lambda: usize) -> T {
        let inst = self.instance;
        let k = inst.orientations();
        let m = lab.m();
        let values = lab.values();
        let pos = lambda / k;
        let state = i * k + lambda % k;
        let mut acc = T::zero();
        for (r, nb) in inst.neighbor_index(pos).iter().enumerate() {
            let Some(nb) = *nb else { continue };
            let base = nb * k;
            for &(t, c) in &self.sparse[state * 4 + r] {
                let t = t as usize;
                acc += c * values[(t / k) * m + base + t % k];
            }
        }
        acc
    }
}

/// Support values `q_i(λ)`, `n × m` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportMatrix<T> {
    m: usize,
    values: Vec<T>,
}

impl<T: Scalar> SupportMatrix<T> {
    #[inline]
    pub fn get(&self, i: usize, lambda: usize) -> T {
        self.values[i * self.m + lambda]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Support for every entry of the labeling.
pub fn support<T: Scalar>(lab: &Labeling<T>, coeffs: &CoefficientView<'_, T>) -> SupportMatrix<T> {
    support_where(lab, coeffs, |_| true)
}

/// Support only where `p_i(λ) > 0`; the remaining entries are left at zero.
/// Update and ALC never read support at zero probabilities.
fn support_active<T: Scalar>(
    lab: &Labeling<T>,
    coeffs: &CoefficientView<'_, T>,
) -> SupportMatrix<T> {
    support_where(lab, coeffs, |p| p != T::zero())
}

fn support_where<T: Scalar>(
    lab: &Labeling<T>,
    coeffs: &CoefficientView<'_, T>,
    active: impl Fn(T) -> bool + Sync,
) -> SupportMatrix<T> {
    let m = lab.m();
    let mut values = vec![T::zero(); lab.n() * m];
    values.par_chunks_mut(m).enumerate().for_each(|(i, out)| {
        for (lambda, (q, &p)) in out.iter_mut().zip(lab.row(i)).enumerate() {
            if active(p) {
                *q = coeffs.support_at(lab, i, lambda);
            }
        }
    });
    SupportMatrix { m, values }
}

/// One multiplicative update. Rows whose normalizer vanishes are returned
/// unchanged; binary rows are fixed points.
pub fn update<T: Scalar>(lab: &Labeling<T>, q: &SupportMatrix<T>) -> Labeling<T> {
    let mut next = lab.clone();
    let m = lab.m();
    next.values_mut()
        .par_chunks_mut(m)
        .enumerate()
        .for_each(|(i, row)| {
            let support = q.row(i);
            let denom: T = row.iter().zip(support).map(|(&p, &s)| p * s).sum();
            if denom > T::zero() {
                for (p, &s) in row.iter_mut().zip(support) {
                    *p = *p * s / denom;
                }
            }
        });
    next
}

/// Average local consistency `Σ p q`.
pub fn alc<T: Scalar>(lab: &Labeling<T>, q: &SupportMatrix<T>) -> T {
    lab.values()
        .iter()
        .zip(q.values())
        .map(|(&p, &s)| p * s)
        .sum()
}

/// Final ALC of a labeling, computing its support from scratch.
pub fn alc_of<T: Scalar>(lab: &Labeling<T>, coeffs: &CoefficientView<'_, T>) -> T {
    alc(lab, &support_active(lab, coeffs))
}

/// Doubly-stochastic balancing by alternating column and row normalization.
/// The result is always row-stochastic; columns converge to unit sums for
/// strictly positive square inputs.
pub fn sinkhorn_balance<T: Scalar>(lab: &Labeling<T>, iterations: usize, tol: f64) -> Labeling<T> {
    let mut next = lab.clone();
    let (n, m) = (lab.n(), lab.m());
    let mut col = vec![T::zero(); m];
    for _ in 0..iterations {
        col.iter_mut().for_each(|c| *c = T::zero());
        for i in 0..n {
            for (c, &p) in col.iter_mut().zip(next.row(i)) {
                *c += p;
            }
        }
        let col_err = col
            .iter()
            .map(|&c| (c - T::one()).abs().as_f64())
            .fold(0.0, f64::max);
        if col_err <= tol {
            break;
        }
        let values = next.values_mut();
        for i in 0..n {
            let row = &mut values[i * m..(i + 1) * m];
            for (p, &c) in row.iter_mut().zip(&col) {
                if c > T::zero() {
                    *p /= c;
                }
            }
            let s: T = row.iter().copied().sum();
            if s > T::zero() {
                row.iter_mut().for_each(|p| *p /= s);
            }
        }
    }
    next
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseConfig {
    /// Minimum ALC gain per iteration before the phase counts as converged.
    pub epsilon: f64,
    /// Probability at which an entry triggers anchoring.
    pub alpha: f64,
    pub max_iterations: usize,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            epsilon: 1e-4,
            alpha: 0.7,
            max_iterations: 1000,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Parameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return Err(Error::Parameter(format!(
                "alpha must lie in (0.5, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ThresholdHit,
    Converged,
    MaxIter,
}

/// An entry proposed for anchoring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub object: usize,
    pub label: usize,
    pub p: f64,
    pub q: f64,
}

/// Highest `p`, then highest `q`, then lowest object, then lowest label.
pub fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.p.total_cmp(&a.p)
        .then(b.q.total_cmp(&a.q))
        .then(a.object.cmp(&b.object))
        .then(a.label.cmp(&b.label))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: usize,
    pub iteration: usize,
    pub alc: f64,
    /// Largest probability held by an unanchored object.
    pub max_entry: f64,
}

#[derive(Clone, Debug)]
pub struct PhaseOutcome<T> {
    pub labeling: Labeling<T>,
    pub iterations: usize,
    pub alc: f64,
    /// Sorted by [`candidate_order`]; never empty while unanchored objects and
    /// allowed positions remain.
    pub candidates: Vec<Candidate>,
    pub stop: StopReason,
    /// Whether the candidates cross the anchoring threshold.
    pub supra_threshold: bool,
    pub trace: Vec<TraceRecord>,
}

/// Runs the dynamics from `lab` until an unanchored entry at an allowed
/// position reaches `alpha`, the ALC gain drops below `epsilon`, or the
/// iteration cap is hit. `allowed` holds 0-based position indices.
pub fn run_phase<T: Scalar>(
    lab: &Labeling<T>,
    coeffs: &CoefficientView<'_, T>,
    cfg: &PhaseConfig,
    allowed: &[usize],
    phase: usize,
    trace: bool,
) -> PhaseOutcome<T> {
    let inst = coeffs.instance();
    let mut allowed_mask = vec![false; inst.dims().len()];
    for &p in allowed {
        allowed_mask[p] = true;
    }
    let mut lab = lab.clone();
    let mut q = support_active(&lab, coeffs);
    let mut prev = alc(&lab, &q).as_f64();
    let mut records = Vec::new();
    let alpha = T::lit(cfg.alpha);

    for it in 1..=cfg.max_iterations {
        lab = update(&lab, &q);
        q = support_active(&lab, coeffs);
        let a = alc(&lab, &q).as_f64();
        if trace {
            records.push(TraceRecord {
                phase,
                iteration: it,
                alc: a,
                max_entry: max_free_entry(&lab),
            });
        }
        let supra = supra_threshold(&lab, &q, inst, &allowed_mask, alpha);
        if !supra.is_empty() {
            return PhaseOutcome {
                labeling: lab,
                iterations: it,
                alc: a,
                candidates: supra,
                stop: StopReason::ThresholdHit,
                supra_threshold: true,
                trace: records,
            };
        }
        if a - prev < cfg.epsilon {
            let candidates = best_allowed(&lab, &q, coeffs, &allowed_mask);
            return PhaseOutcome {
                labeling: lab,
                iterations: it,
                alc: a,
                candidates,
                stop: StopReason::Converged,
                supra_threshold: false,
                trace: records,
            };
        }
        prev = a;
    }
    let candidates = best_allowed(&lab, &q, coeffs, &allowed_mask);
    PhaseOutcome {
        labeling: lab,
        iterations: cfg.max_iterations,
        alc: prev,
        candidates,
        stop: StopReason::MaxIter,
        supra_threshold: false,
        trace: records,
    }
}

fn max_free_entry<T: Scalar>(lab: &Labeling<T>) -> f64 {
    lab.free_objects()
        .flat_map(|i| lab.row(i).iter().copied())
        .fold(T::zero(), |a, b| a.max(b))
        .as_f64()
}

fn supra_threshold<T: Scalar>(
    lab: &Labeling<T>,
    q: &SupportMatrix<T>,
    inst: &ProblemInstance,
    allowed: &[bool],
    alpha: T,
) -> Vec<Candidate> {
    let mut out = Vec::new();
    for i in lab.free_objects() {
        for (l, &p) in lab.row(i).iter().enumerate() {
            if p >= alpha && allowed[inst.label_position(l)] {
                out.push(Candidate {
                    object: i,
                    label: l,
                    p: p.as_f64(),
                    q: q.get(i, l).as_f64(),
                });
            }
        }
    }
    out.sort_by(candidate_order);
    out
}

/// Best unanchored entry at an allowed position, preferring entries with
/// positive probability.
fn best_allowed<T: Scalar>(
    lab: &Labeling<T>,
    q: &SupportMatrix<T>,
    coeffs: &CoefficientView<'_, T>,
    allowed: &[bool],
) -> Vec<Candidate> {
    let inst = coeffs.instance();
    let mut best: Option<Candidate> = None;
    fn consider(best: &mut Option<Candidate>, c: Candidate) {
        if best
            .as_ref()
            .is_none_or(|b| candidate_order(&c, b) == Ordering::Less)
        {
            *best = Some(c);
        }
    }
    for i in lab.free_objects() {
        for (l, &p) in lab.row(i).iter().enumerate() {
            if p > T::zero() && allowed[inst.label_position(l)] {
                consider(
                    &mut best,
                    Candidate {
                        object: i,
                        label: l,
                        p: p.as_f64(),
                        q: q.get(i, l).as_f64(),
                    },
                );
            }
        }
    }
    if best.is_none() {
        for i in lab.free_objects() {
            for l in 0..lab.m() {
                if allowed[inst.label_position(l)] && lab.owner(inst.label_position(l)).is_none() {
                    consider(
                        &mut best,
                        Candidate {
                            object: i,
                            label: l,
                            p: 0.0,
                            q: coeffs.support_at(lab, i, l).as_f64(),
                        },
                    );
                }
            }
        }
    }
    best.into_iter().collect()
}
