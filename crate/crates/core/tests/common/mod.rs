#![allow(dead_code)]

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use w1plus::graph::{Graph, Measure, VertexId};
use w1plus::pipeline::{interpolate, Interpolation, PipelineOptions};

pub fn diamond() -> Graph {
    Graph::new(
        &["o", "a", "b", "z"],
        &[("o", "a"), ("o", "b"), ("a", "z"), ("b", "z")],
    )
    .unwrap()
}

/// Random tree on `n` vertices (each vertex attaches to an earlier one).
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    Graph::from_index_edges(n, &edges).unwrap()
}

/// Random connected graph: a random tree plus `extra` additional edges.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let mut tries = 0;
    let mut added = 0;
    while added < extra && tries < 50 * extra + 50 {
        tries += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let e = (a.min(b), a.max(b));
        if edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == e) {
            continue;
        }
        edges.push(e);
        added += 1;
    }
    Graph::from_index_edges(n, &edges).unwrap()
}

/// Random measure on `k` distinct vertices of `g` with masses bounded away
/// from zero.
pub fn random_measure<R: Rng>(rng: &mut R, g: &Graph, k: usize) -> Measure {
    let mut verts: Vec<usize> = (0..g.vertex_count()).collect();
    verts.shuffle(rng);
    let mut mass = vec![0.0; g.vertex_count()];
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    for (i, &v) in verts[..k].iter().enumerate() {
        mass[v] = raw[i] / total;
    }
    let s: f64 = mass.iter().sum();
    // push the rounding residue onto the first vertex
    mass[verts[0]] += 1.0 - s;
    Measure::new(g, mass).unwrap()
}

pub fn run(g: Graph, f0: &Measure, f1: &Measure) -> Interpolation {
    interpolate(Arc::new(g), f0, f1, &PipelineOptions::default()).unwrap()
}

pub fn measure(g: &Graph, mass: &[f64]) -> Measure {
    Measure::new(g, mass.to_vec()).unwrap()
}

/// A random connected graph with two random measures on it.
pub struct Instance {
    pub graph: Graph,
    pub f0: Measure,
    pub f1: Measure,
    pub label: String,
}

/// Draws a tree, a grid or a sparse connected graph with at most `max_n`
/// vertices, and measures with at most `max_support` support points.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize, max_support: usize) -> Instance {
    let (graph, label) = match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(2..=max_n);
            (random_tree(rng, n), format!("tree n={n}"))
        }
        1 => {
            let rows = rng.gen_range(1..=8.min(max_n));
            let cols = rng.gen_range(2..=(max_n / rows).clamp(2, 10));
            (Graph::grid(rows, cols), format!("grid {rows}x{cols}"))
        }
        _ => {
            let n = rng.gen_range(3..=max_n);
            let extra = rng.gen_range(0..=n / 4);
            (random_connected(rng, n, extra), format!("graph n={n} extra={extra}"))
        }
    };
    let n = graph.vertex_count();
    let k0 = rng.gen_range(1..=max_support.min(n));
    let k1 = rng.gen_range(1..=max_support.min(n));
    let f0 = random_measure(rng, &graph, k0);
    let f1 = random_measure(rng, &graph, k1);
    Instance {
        graph,
        f0,
        f1,
        label: format!("{label} |supp f0|={k0} |supp f1|={k1}"),
    }
}

/// `count` pipeline runs on random instances. Instances whose optimal face
/// is degenerate are redrawn; any other error is a test failure.
pub fn suite(seed: u64, count: usize, max_n: usize, max_support: usize) -> Vec<(String, Interpolation)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut redraws = 0;
    while out.len() < count {
        let inst = random_instance(&mut rng, max_n, max_support);
        match interpolate(Arc::new(inst.graph), &inst.f0, &inst.f1, &PipelineOptions::default()) {
            Ok(r) => out.push((inst.label, r)),
            Err(w1plus::Error::DegenerateFace(..)) => {
                redraws += 1;
                assert!(redraws < 10 * count, "too many degenerate faces");
            }
            Err(e) => panic!("{}: {e}", inst.label),
        }
    }
    out
}

/// The couplings supported on a set of pairs, parameterised by the masses
/// of the pairs outside a spanning forest of the bipartite pair graph. The
/// forest masses follow by peeling leaves.
pub struct FacePolytope {
    pairs: Vec<(usize, usize)>,
    supply: Vec<f64>,
    forest: Vec<bool>,
    pub free: Vec<usize>,
}

impl FacePolytope {
    pub fn new(pairs: &[(VertexId, VertexId)], f0: &Measure, f1: &Measure) -> Self {
        let xs = f0.support();
        let ys = f1.support();
        let nodes = xs.len() + ys.len();
        let local: Vec<(usize, usize)> = pairs
            .iter()
            .map(|&(x, y)| {
                let i = xs.iter().position(|&v| v == x).unwrap();
                let j = ys.iter().position(|&v| v == y).unwrap();
                (i, xs.len() + j)
            })
            .collect();
        let mut root: Vec<usize> = (0..nodes).collect();
        fn find(root: &mut [usize], mut v: usize) -> usize {
            while root[v] != v {
                v = root[v];
            }
            v
        }
        let mut forest = vec![false; local.len()];
        for (k, &(a, b)) in local.iter().enumerate() {
            let (ra, rb) = (find(&mut root, a), find(&mut root, b));
            if ra != rb {
                root[ra] = rb;
                forest[k] = true;
            }
        }
        let supply = xs.iter().map(|&x| f0.get(x)).chain(ys.iter().map(|&y| f1.get(y))).collect();
        let free = (0..local.len()).filter(|&k| !forest[k]).collect();
        FacePolytope {
            pairs: local,
            supply,
            forest,
            free,
        }
    }

    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    /// Full coupling for the given free masses, or `None` if some mass is
    /// negative.
    pub fn complete(&self, free_mass: &[f64]) -> Option<Vec<f64>> {
        let mut pi = vec![0.0; self.pairs.len()];
        let mut rest = self.supply.clone();
        for (&k, &m) in self.free.iter().zip(free_mass) {
            if m < 0.0 {
                return None;
            }
            pi[k] = m;
            let (a, b) = self.pairs[k];
            rest[a] -= m;
            rest[b] -= m;
        }
        let mut degree = vec![0usize; rest.len()];
        let mut open = self.forest.clone();
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            if open[k] {
                degree[a] += 1;
                degree[b] += 1;
            }
        }
        let mut leaves: Vec<usize> = (0..rest.len()).filter(|&v| degree[v] == 1).collect();
        while let Some(v) = leaves.pop() {
            if degree[v] != 1 {
                continue;
            }
            let k = (0..self.pairs.len())
                .find(|&k| open[k] && (self.pairs[k].0 == v || self.pairs[k].1 == v))
                .unwrap();
            open[k] = false;
            let (a, b) = self.pairs[k];
            let other = if a == v { b } else { a };
            pi[k] = rest[v];
            rest[v] = 0.0;
            rest[other] -= pi[k];
            degree[v] = 0;
            degree[other] -= 1;
            if degree[other] == 1 {
                leaves.push(other);
            }
        }
        debug_assert!(rest.iter().all(|r| r.abs() < 1e-9), "unbalanced component");
        if pi.iter().any(|&m| m < -1e-15) {
            return None;
        }
        Some(pi.into_iter().map(|m| m.max(0.0)).collect())
    }
}

/// `Σ π (log(π / c) - 1)` with `0 log 0 = 0`.
pub fn entropy_objective(pi: &[f64], c: &[f64]) -> f64 {
    pi.iter()
        .zip(c)
        .map(|(&p, &c)| if p > 0.0 { p * ((p / c).ln() - 1.0) } else { 0.0 })
        .sum()
}
