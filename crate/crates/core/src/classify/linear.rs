use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::StanceLabel;
use crate::features::FeatureVector;
use crate::scalar::Real;

use super::format::{read_class_marker, Reader};
use super::{derive_seed, ModelConfig, Result, Scores};

/// Rescale the lazily-scaled weights once the scale factor gets this small.
const MIN_SCALE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane<F> {
    pub weights: Vec<F>,
    pub bias: F,
}

impl<F: Real> Hyperplane<F> {
    pub fn decision(&self, v: &FeatureVector) -> F {
        v.indices()
            .iter()
            .fold(self.bias, |acc, &j| acc + self.weights[j as usize])
    }
}

/// One hyperplane per label seen in training (one-vs-rest).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm<F> {
    pub planes: [Option<Hyperplane<F>>; 3],
}

impl<F: Real> LinearSvm<F> {
    pub(crate) fn fit(config: &ModelConfig<F>, vectors: &[FeatureVector], labels: &[StanceLabel], dim: usize) -> Self {
        let planes: Vec<Option<Hyperplane<F>>> = StanceLabel::ALL
            .par_iter()
            .map(|&class| {
                if !labels.contains(&class) {
                    return None;
                }
                let y: Vec<bool> = labels.iter().map(|l| *l == class).collect();
                let seed = derive_seed(config.seed, class.index() as u64);
                Some(fit_binary(config, vectors, &y, dim, seed))
            })
            .collect();
        let mut it = planes.into_iter();
        LinearSvm {
            planes: [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
        }
    }

    pub fn decision_values(&self, v: &FeatureVector) -> Scores<F> {
        [0, 1, 2].map(|i| self.planes[i].as_ref().map(|p| p.decision(v)))
    }

    pub(crate) fn write(&self, out: &mut String) {
        for (label, plane) in StanceLabel::ALL.iter().zip(&self.planes) {
            match plane {
                None => {
                    let _ = writeln!(out, "class={label} absent");
                }
                Some(p) => {
                    let _ = writeln!(out, "class={label} present");
                    let _ = writeln!(out, "bias={}", p.bias);
                    out.push_str("weights=");
                    for (i, w) in p.weights.iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{w}");
                    }
                    out.push('\n');
                }
            }
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>, dim: usize) -> Result<Self> {
        let mut planes = [None, None, None];
        for (slot, label) in planes.iter_mut().zip(StanceLabel::ALL) {
            if read_class_marker(r, label)? {
                let bias = r.parse_field("bias")?;
                let (ln, weights) = r.list_field("weights")?;
                if weights.len() != dim {
                    return Err(r.error(ln, &format!("expected {dim} weights")));
                }
                *slot = Some(Hyperplane { weights, bias });
            }
        }
        Ok(LinearSvm { planes })
    }
}

/// Regularized hinge objective `lambda/2 |w|^2 + mean(hinge)`; the bias is
/// treated as one more weight on a constant feature.
fn objective<F: Real>(plane: &Hyperplane<F>, vectors: &[FeatureVector], y: &[bool], lambda: F) -> F {
    let norm = plane
        .weights
        .iter()
        .fold(plane.bias * plane.bias, |acc, &w| acc + w * w);
    let loss = vectors.iter().zip(y).fold(F::zero(), |acc, (v, &pos)| {
        let s = if pos { F::one() } else { -F::one() };
        let m = F::one() - s * plane.decision(v);
        if m > F::zero() {
            acc + m
        } else {
            acc
        }
    });
    lambda / (F::one() + F::one()) * norm + loss / F::from_count(vectors.len() as u64)
}

fn fit_binary<F: Real>(
    config: &ModelConfig<F>,
    vectors: &[FeatureVector],
    y: &[bool],
    dim: usize,
    seed: u64,
) -> Hyperplane<F> {
    let n = vectors.len();
    let lambda = F::one() / (config.c * F::from_count(n as u64));
    let min_scale = F::from_f64(MIN_SCALE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();

    // w = scale * v, so the shrink step is O(1).
    let mut v = vec![F::zero(); dim];
    let mut vb = F::zero();
    let mut scale = F::one();
    let mut t: u64 = 0;

    let mut best: Option<(F, Hyperplane<F>)> = None;
    let mut prev: Option<F> = None;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = F::one() / (lambda * F::from_count(t + 1));
            let x = &vectors[i];
            let s = if y[i] { F::one() } else { -F::one() };
            let raw = x.indices().iter().fold(vb, |acc, &j| acc + v[j as usize]);
            let margin = s * scale * raw;
            scale = scale * (F::one() - eta * lambda);
            if margin < F::one() {
                let step = eta * s / scale;
                for &j in x.indices() {
                    v[j as usize] = v[j as usize] + step;
                }
                vb = vb + step;
            }
            if scale < min_scale {
                for w in v.iter_mut() {
                    *w = *w * scale;
                }
                vb = vb * scale;
                scale = F::one();
            }
        }

        let plane = Hyperplane {
            weights: v.iter().map(|&w| w * scale).collect(),
            bias: vb * scale,
        };
        let obj = objective(&plane, vectors, y, lambda);
        let improved = best.as_ref().is_none_or(|(b, _)| obj < *b);
        let converged = prev.is_some_and(|p| (p - obj).abs() < config.objective_tolerance);
        if improved {
            best = Some((obj, plane));
        }
        if converged {
            break;
        }
        prev = Some(obj);
    }
    best.expect("at least one epoch").1
}
