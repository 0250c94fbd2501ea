use std::fmt::Write;
use std::marker::PhantomData;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::StanceLabel;
use crate::features::FeatureVector;
use crate::scalar::Real;

use super::format::Reader;
use super::{argmax_label, derive_seed, ClassifyError, ModelConfig, Result};

/// Nodes are stored in preorder; `Split` children are indices into the
/// owning tree's node list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Leaf { label: StanceLabel },
    Split { feature: u32, absent: u32, present: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, v: &FeatureVector) -> StanceLabel {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf { label } => return label,
                Node::Split {
                    feature,
                    absent,
                    present,
                } => {
                    at = if v.contains(feature) { present } else { absent } as usize;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, at: usize) -> usize {
            match t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { absent, present, .. } => 1 + go(t, absent as usize).max(go(t, present as usize)),
            }
        }
        go(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest<F> {
    pub trees: Vec<DecisionTree>,
    /// Labels seen in training; votes for the others are reported as absent.
    pub present: [bool; 3],
    _scalar: PhantomData<F>,
}

fn counts_of(samples: &[usize], labels: &[StanceLabel]) -> [u32; 3] {
    let mut c = [0u32; 3];
    for &s in samples {
        c[labels[s].index()] += 1;
    }
    c
}

fn majority(counts: &[u32; 3]) -> StanceLabel {
    argmax_label(&counts.map(Some))
}

/// `n * gini = n - sum c^2 / n`; summing this over children and dividing by
/// the parent size gives the weighted child impurity.
fn scaled_gini<F: Real>(counts: [u32; 3]) -> F {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return F::zero();
    }
    let nf = F::from_count(n as u64);
    let sq = counts
        .iter()
        .fold(F::zero(), |acc, &c| acc + F::from_count(c as u64 * c as u64));
    nf - sq / nf
}

struct TreeBuilder<'a> {
    vectors: &'a [FeatureVector],
    labels: &'a [StanceLabel],
    dim: usize,
    mtry: usize,
    max_depth: Option<usize>,
    rng: ChaCha8Rng,
    /// Per-feature class counts among the current node's samples.
    present_counts: Vec<[u32; 3]>,
    touched: Vec<u32>,
    order: Vec<u32>,
}

impl<F: Real> RandomForest<F> {
    pub(crate) fn fit(config: &ModelConfig<F>, vectors: &[FeatureVector], labels: &[StanceLabel], dim: usize) -> Self {
        let mtry = ((dim as f64).sqrt().floor() as usize).max(1);
        let trees = (0..config.trees)
            .into_par_iter()
            .map(|t| {
                let mut b = TreeBuilder {
                    vectors,
                    labels,
                    dim,
                    mtry,
                    max_depth: config.max_depth,
                    rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, t as u64)),
                    present_counts: vec![[0; 3]; dim],
                    touched: Vec::new(),
                    order: (0..dim as u32).collect(),
                };
                let n = vectors.len();
                let sample: Vec<usize> = (0..n).map(|_| b.rng.gen_range(0..n)).collect();
                b.build::<F>(sample)
            })
            .collect();
        let mut present = [false; 3];
        for l in labels {
            present[l.index()] = true;
        }
        RandomForest {
            trees,
            present,
            _scalar: PhantomData,
        }
    }

    /// Tree votes per label; `None` for labels absent from training.
    pub fn votes(&self, v: &FeatureVector) -> [Option<u32>; 3] {
        let mut votes = [0u32; 3];
        for t in &self.trees {
            votes[t.predict(v).index()] += 1;
        }
        [0, 1, 2].map(|i| self.present[i].then_some(votes[i]))
    }

    pub(crate) fn write(&self, out: &mut String) {
        let flags: Vec<&str> = StanceLabel::ALL
            .iter()
            .zip(self.present)
            .filter(|(_, p)| *p)
            .map(|(l, _)| l.as_str())
            .collect();
        let _ = writeln!(out, "labels={}", flags.join(" "));
        let _ = writeln!(out, "forest={}", self.trees.len());
        for t in &self.trees {
            let _ = writeln!(out, "nodes={}", t.nodes.len());
            for n in &t.nodes {
                match n {
                    Node::Leaf { label } => {
                        let _ = writeln!(out, "leaf {label}");
                    }
                    Node::Split {
                        feature,
                        absent,
                        present,
                    } => {
                        let _ = writeln!(out, "split {feature} {absent} {present}");
                    }
                }
            }
        }
    }

    pub(crate) fn read(r: &mut Reader<'_>, dim: usize) -> Result<Self> {
        let (ln, names) = r.list_field::<StanceLabel>("labels")?;
        if names.is_empty() {
            return Err(r.error(ln, "no labels"));
        }
        let mut present = [false; 3];
        for l in names {
            present[l.index()] = true;
        }
        let count: usize = r.parse_field("forest")?;
        let mut trees = Vec::with_capacity(count);
        for _ in 0..count {
            let n: usize = r.parse_field("nodes")?;
            let mut nodes = Vec::with_capacity(n);
            for at in 0..n {
                let (ln, line) = r.line()?;
                nodes.push(parse_node(line, at, n, dim).ok_or_else(|| r.error(ln, "invalid node"))?);
            }
            if nodes.is_empty() {
                return Err(ClassifyError::Format {
                    line: ln,
                    message: "empty tree".into(),
                });
            }
            trees.push(DecisionTree { nodes });
        }
        Ok(RandomForest {
            trees,
            present,
            _scalar: PhantomData,
        })
    }
}

/// Children must come later in preorder, which rules out cycles.
fn parse_node(line: &str, at: usize, n: usize, dim: usize) -> Option<Node> {
    let mut parts = line.split(' ');
    let node = match parts.next()? {
        "leaf" => Node::Leaf {
            label: parts.next()?.parse().ok()?,
        },
        "split" => {
            let feature: u32 = parts.next()?.parse().ok()?;
            let absent: u32 = parts.next()?.parse().ok()?;
            let present: u32 = parts.next()?.parse().ok()?;
            let child_ok = |c: u32| (c as usize) > at && (c as usize) < n;
            if feature as usize >= dim || !child_ok(absent) || !child_ok(present) {
                return None;
            }
            Node::Split {
                feature,
                absent,
                present,
            }
        }
        _ => return None,
    };
    parts.next().is_none().then_some(node)
}

impl TreeBuilder<'_> {
    fn build<F: Real>(&mut self, sample: Vec<usize>) -> DecisionTree {
        let mut nodes = Vec::new();
        self.grow::<F>(&mut nodes, sample, 0);
        DecisionTree { nodes }
    }

    fn grow<F: Real>(&mut self, nodes: &mut Vec<Node>, samples: Vec<usize>, depth: usize) -> u32 {
        let at = nodes.len() as u32;
        let counts = counts_of(&samples, self.labels);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let leaf = Node::Leaf {
            label: majority(&counts),
        };
        if pure || samples.len() < 2 || self.max_depth.is_some_and(|d| depth >= d) {
            nodes.push(leaf);
            return at;
        }
        let Some(feature) = self.best_split::<F>(&samples, counts) else {
            nodes.push(leaf);
            return at;
        };
        nodes.push(Node::Split {
            feature,
            absent: 0,
            present: 0,
        });
        let (with, without): (Vec<usize>, Vec<usize>) =
            samples.into_iter().partition(|&s| self.vectors[s].contains(feature));
        let absent = self.grow::<F>(nodes, without, depth + 1);
        let present = self.grow::<F>(nodes, with, depth + 1);
        nodes[at as usize] = Node::Split {
            feature,
            absent,
            present,
        };
        at
    }

    /// Visits features in random order until `mtry` of them split the node
    /// non-trivially, returning the one with the lowest child impurity.
    fn best_split<F: Real>(&mut self, samples: &[usize], counts: [u32; 3]) -> Option<u32> {
        for &f in &self.touched {
            self.present_counts[f as usize] = [0; 3];
        }
        self.touched.clear();
        for &s in samples {
            let c = self.labels[s].index();
            for &f in self.vectors[s].indices() {
                let slot = &mut self.present_counts[f as usize];
                if *slot == [0; 3] {
                    self.touched.push(f);
                }
                slot[c] += 1;
            }
        }

        let n = samples.len() as u32;
        let mut best: Option<(F, u32)> = None;
        let mut evaluated = 0;
        for k in 0..self.dim {
            if evaluated == self.mtry {
                break;
            }
            let pick = self.rng.gen_range(k..self.dim);
            self.order.swap(k, pick);
            let f = self.order[k];
            let with = self.present_counts[f as usize];
            let m: u32 = with.iter().sum();
            if m == 0 || m == n {
                continue;
            }
            evaluated += 1;
            let without = [0, 1, 2].map(|c| counts[c] - with[c]);
            let impurity = scaled_gini::<F>(with) + scaled_gini::<F>(without);
            if best.as_ref().is_none_or(|(b, _)| impurity < *b) {
                best = Some((impurity, f));
            }
        }
        best.map(|(_, f)| f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{train, ModelKind, ModelParams, TrainedModel};
    use StanceLabel::*;

    fn forest_config(trees: usize) -> ModelConfig<f64> {
        let mut c = ModelConfig::new(ModelKind::RandomForest);
        c.trees = trees;
        c
    }

    #[test]
    fn gini_of_pure_and_mixed_nodes() {
        assert_eq!(scaled_gini::<f64>([4, 0, 0]), 0.0);
        assert_eq!(scaled_gini::<f64>([2, 2, 0]), 2.0);
        assert_eq!(scaled_gini::<f64>([0, 0, 0]), 0.0);
    }

    #[test]
    fn separable_set_is_learned() {
        let mut vs = Vec::new();
        let mut ls = Vec::new();
        for (c, label) in StanceLabel::ALL.iter().enumerate() {
            for k in 0..10u32 {
                vs.push(FeatureVector::new(9, vec![3 * c as u32 + k % 3]));
                ls.push(*label);
            }
        }
        let m = train(&forest_config(50), &vs, &ls, "").unwrap();
        let correct = vs.iter().zip(&ls).filter(|(v, l)| m.predict(v).unwrap() == **l).count();
        assert!(correct * 100 >= 95 * vs.len(), "{correct}/{}", vs.len());
    }

    #[test]
    fn all_zero_vector_follows_absent_branches() {
        // Five tweets; the three featureless ones are the majority class.
        let vs = vec![
            FeatureVector::new(2, vec![0]),
            FeatureVector::new(2, vec![1]),
            FeatureVector::new(2, vec![]),
            FeatureVector::new(2, vec![]),
            FeatureVector::new(2, vec![]),
        ];
        let ls = vec![Favor, Against, None, None, None];
        let zero = FeatureVector::empty(2);
        for seed in 0..20 {
            let mut cfg = forest_config(1);
            cfg.seed = seed;
            let m = train(&cfg, &vs, &ls, "").unwrap();
            let ModelParams::Forest(f) = &m.params else {
                unreachable!()
            };
            // Featureless tweets cannot be separated from each other, so if the
            // bootstrap kept one, the absent-branch path ends in its pure leaf.
            if f.trees[0].nodes.contains(&Node::Leaf { label: None }) {
                assert_eq!(m.predict(&zero).unwrap(), None);
            }
        }
        let m = train(&forest_config(25), &vs, &ls, "").unwrap();
        assert_eq!(m.predict(&zero).unwrap(), None);
    }

    #[test]
    fn vote_ties_favor_earlier_label() {
        let forest = RandomForest::<f64> {
            trees: vec![
                DecisionTree {
                    nodes: vec![Node::Leaf { label: None }],
                },
                DecisionTree {
                    nodes: vec![Node::Leaf { label: Against }],
                },
            ],
            present: [true, true, true],
            _scalar: PhantomData,
        };
        let v = FeatureVector::empty(1);
        assert_eq!(argmax_label(&forest.votes(&v)), Against);
    }

    #[test]
    fn max_depth_is_respected() {
        let vs: Vec<FeatureVector> = (0..16u32)
            .map(|i| FeatureVector::new(4, (0..4).filter(|b| i >> b & 1 == 1).collect()))
            .collect();
        let ls: Vec<StanceLabel> = (0..16).map(|i| StanceLabel::ALL[i % 3]).collect();
        let mut cfg = forest_config(10);
        cfg.max_depth = Some(2);
        let m = train(&cfg, &vs, &ls, "").unwrap();
        let ModelParams::Forest(f) = &m.params else {
            unreachable!()
        };
        assert!(f.trees.iter().all(|t| t.depth() <= 2));
    }

    #[test]
    fn seeded_training_is_reproducible_and_serializable() {
        let vs: Vec<FeatureVector> = (0..30u32)
            .map(|i| FeatureVector::new(6, vec![i % 6, (i * 7) % 6]))
            .collect();
        let ls: Vec<StanceLabel> = (0..30).map(|i| StanceLabel::ALL[i % 3]).collect();
        let a = train(&forest_config(20), &vs, &ls, "fp").unwrap();
        let b = train(&forest_config(20), &vs, &ls, "fp").unwrap();
        assert_eq!(a, b);
        let back = TrainedModel::<f64>::from_text(&a.to_text()).unwrap();
        assert_eq!(back, a);
        let mut other = forest_config(20);
        other.seed = 7;
        assert_ne!(train(&other, &vs, &ls, "fp").unwrap(), a);
    }
}
