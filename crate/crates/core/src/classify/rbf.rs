use std::fmt::Write;

use rayon::prelude::*;

use crate::corpus::StanceLabel;
use crate::features::FeatureVector;
use crate::scalar::Real;

use super::format::{read_class_marker, Reader};
use super::{ModelConfig, Result, Scores};

/// Floor for the second-order curvature term.
const TAU: f64 = 1e-12;

/// `f(x) = sum_i coef_i * K(sv_i, x) - rho`, with `coef_i = alpha_i * y_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelExpansion<F> {
    /// (support vector index, coefficient)
    pub coefficients: Vec<(u32, F)>,
    pub rho: F,
}

/// One-vs-rest RBF SVMs sharing a pool of support vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfSvm<F> {
    pub gamma: F,
    pub support: Vec<FeatureVector>,
    pub machines: [Option<KernelExpansion<F>>; 3],
}

/// Squared distances between training vectors plus a lookup table of
/// `exp(-gamma * d)` for every distance that occurs.
struct Gram<F> {
    n: usize,
    dist: Vec<u32>,
    table: Vec<F>,
}

impl<F: Real> Gram<F> {
    fn new(vectors: &[FeatureVector], gamma: F) -> Self {
        let n = vectors.len();
        let rows: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|i| vectors.iter().map(|b| vectors[i].squared_distance(b) as u32).collect())
            .collect();
        let dist: Vec<u32> = rows.into_iter().flatten().collect();
        let max = dist.iter().copied().max().unwrap_or(0);
        let table = (0..=max).map(|d| (-gamma * F::from_count(d as u64)).exp()).collect();
        Gram { n, dist, table }
    }

    #[inline]
    fn k(&self, i: usize, j: usize) -> F {
        self.table[self.dist[i * self.n + j] as usize]
    }
}

/// Dual solution of one binary problem.
struct Solution<F> {
    alpha: Vec<F>,
    rho: F,
}

/// SMO with second-order working-set selection on
/// `min 1/2 a'Qa - e'a  s.t.  y'a = 0, 0 <= a <= C`.
fn solve<F: Real>(gram: &Gram<F>, y: &[F], c: F, eps: F) -> Solution<F> {
    let n = gram.n;
    let tau = F::from_f64(TAU);
    let two = F::one() + F::one();
    let zero = F::zero();
    let one = F::one();
    let mut alpha = vec![zero; n];
    let mut grad = vec![-one; n];
    let max_iter = 10_000_000usize.max(100 * n);

    let at_upper = |a: F| a >= c;
    let at_lower = |a: F| a <= zero;

    for _ in 0..max_iter {
        // i: maximal violator
        let mut gmax = F::neg_infinity();
        let mut gmax_idx = None;
        for t in 0..n {
            if y[t] > zero {
                if !at_upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    gmax_idx = Some(t);
                }
            } else if !at_lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                gmax_idx = Some(t);
            }
        }
        // j: largest objective decrease given i
        let mut gmax2 = F::neg_infinity();
        let mut gmin_idx = None;
        let mut obj_diff_min = F::infinity();
        for j in 0..n {
            let grad_diff = if y[j] > zero {
                if at_lower(alpha[j]) {
                    continue;
                }
                if grad[j] >= gmax2 {
                    gmax2 = grad[j];
                }
                gmax + grad[j]
            } else {
                if at_upper(alpha[j]) {
                    continue;
                }
                if -grad[j] >= gmax2 {
                    gmax2 = -grad[j];
                }
                gmax - grad[j]
            };
            if let Some(i) = gmax_idx {
                if grad_diff > zero {
                    let quad = two - two * gram.k(i, j);
                    let quad = if quad > zero { quad } else { tau };
                    let obj_diff = -(grad_diff * grad_diff) / quad;
                    if obj_diff <= obj_diff_min {
                        gmin_idx = Some(j);
                        obj_diff_min = obj_diff;
                    }
                }
            }
        }
        let (i, j) = match (gmax_idx, gmin_idx) {
            (Some(i), Some(j)) if gmax + gmax2 >= eps => (i, j),
            _ => break,
        };

        let qij = y[i] * y[j] * gram.k(i, j);
        let old_i = alpha[i];
        let old_j = alpha[j];
        if y[i] != y[j] {
            let quad = two + two * qij;
            let quad = if quad > zero { quad } else { tau };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] = alpha[i] + delta;
            alpha[j] = alpha[j] + delta;
            if diff > zero {
                if alpha[j] < zero {
                    alpha[j] = zero;
                    alpha[i] = diff;
                }
            } else if alpha[i] < zero {
                alpha[i] = zero;
                alpha[j] = -diff;
            }
            if diff > zero {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = two - two * qij;
            let quad = if quad > zero { quad } else { tau };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] = alpha[i] - delta;
            alpha[j] = alpha[j] + delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < zero {
                alpha[j] = zero;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < zero {
                alpha[i] = zero;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for k in 0..n {
            let qik = y[i] * y[k] * gram.k(i, k);
            let qjk = y[j] * y[k] * gram.k(j, k);
            grad[k] = grad[k] + qik * di + qjk * dj;
        }
    }

    // rho: mean over free vectors, else midpoint of the feasible interval.
    let mut ub = F::infinity();
    let mut lb = F::neg_infinity();
    let mut sum_free = zero;
    let mut n_free = 0u64;
    for t in 0..n {
        let yg = y[t] * grad[t];
        let pos = y[t] > zero;
        if at_upper(alpha[t]) {
            if pos {
                lb = lb.max(yg);
            } else {
                ub = ub.min(yg);
            }
        } else if at_lower(alpha[t]) {
            if pos {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free = sum_free + yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / F::from_count(n_free)
    } else {
        (ub + lb) / two
    };
    Solution { alpha, rho }
}

impl<F: Real> RbfSvm<F> {
    pub(crate) fn fit(config: &ModelConfig<F>, vectors: &[FeatureVector], labels: &[StanceLabel], dim: usize) -> Self {
        let gamma = config.gamma.resolve(dim);
        let gram = Gram::new(vectors, gamma);
        let solutions: Vec<Option<(Vec<F>, F)>> = StanceLabel::ALL
            .par_iter()
            .map(|&class| {
                if !labels.contains(&class) {
                    return None;
                }
                let y: Vec<F> = labels
                    .iter()
                    .map(|l| if *l == class { F::one() } else { -F::one() })
                    .collect();
                let sol = solve(&gram, &y, config.c, config.kkt_tolerance);
                let coef = sol.alpha.iter().zip(&y).map(|(&a, &s)| a * s).collect();
                Some((coef, sol.rho))
            })
            .collect();

        // Pool support vectors across machines, in training order.
        let mut pool_index = vec![None; vectors.len()];
        let mut support = Vec::new();
        for (t, v) in vectors.iter().enumerate() {
            if solutions.iter().flatten().any(|(coef, _)| coef[t] != F::zero()) {
                pool_index[t] = Some(support.len() as u32);
                support.push(v.clone());
            }
        }
        let mut machines = [None, None, None];
        for (slot, sol) in machines.iter_mut().zip(solutions) {
            *slot = sol.map(|(coef, rho)| KernelExpansion {
                coefficients: coef
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != F::zero())
                    .map(|(t, &c)| (pool_index[t].expect("pooled"), c))
                    .collect(),
                rho,
            });
        }
        RbfSvm {
            gamma,
            support,
            machines,
        }
    }

    pub fn decision_values(&self, v: &FeatureVector) -> Scores<F> {
        let k: Vec<F> = self
            .support
            .iter()
            .map(|s| (-self.gamma * F::from_count(s.squared_distance(v) as u64)).exp())
            .collect();
        [0, 1, 2].map(|c| {
            self.machines[c].as_ref().map(|m| {
                m.coefficients
                    .iter()
                    .fold(F::zero(), |acc, &(i, a)| acc + a * k[i as usize])
                    - m.rho
            })
        })
    }

    pub(crate) fn write(&self, out: &mut String) {
        let _ = writeln!(out, "gamma_value={}", self.gamma);
        let _ = writeln!(out, "support={}", self.support.len());
        for s in &self.support {
            out.push_str("sv=");
            for (i, x) in s.indices().iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        for (label, m) in StanceLabel::ALL.iter().zip(&self.machines) {
            match m {
                None => {
                    let _ = writeln!(out, "class={label} absent");
                }
                Some(m) => {
                    let _ = writeln!(out, "class={label} present");
                    let _ = writeln!(out, "rho={}", m.rho);
                    out.push_str("coef=");
                    for (k, (i, a)) in m.coefficients.iter().enumerate() {
                        if k > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{i}:{a}");
                    }
                    out.push('\n');
                }
            }
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>, dim: usize) -> Result<Self> {
        let gamma = r.parse_field("gamma_value")?;
        let count: usize = r.parse_field("support")?;
        let mut support = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, idx) = r.list_field::<u32>("sv")?;
            if idx.iter().any(|&i| i as usize >= dim) || idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(r.error(ln, "support vector indices must be increasing and in range"));
            }
            support.push(FeatureVector::new(dim, idx));
        }
        let mut machines = [None, None, None];
        for (slot, label) in machines.iter_mut().zip(StanceLabel::ALL) {
            if !read_class_marker(r, label)? {
                continue;
            }
            let rho = r.parse_field("rho")?;
            let (ln, pairs) = r.list_field::<String>("coef")?;
            let mut coefficients = Vec::with_capacity(pairs.len());
            for p in pairs {
                let parsed = p
                    .split_once(':')
                    .and_then(|(i, a)| Some((i.parse::<u32>().ok()?, a.parse::<F>().ok()?)));
                match parsed {
                    Some((i, a)) if (i as usize) < count => coefficients.push((i, a)),
                    _ => return Err(r.error(ln, &format!("invalid coefficient {p:?}"))),
                }
            }
            *slot = Some(KernelExpansion { coefficients, rho });
        }
        Ok(RbfSvm {
            gamma,
            support,
            machines,
        })
    }
}
