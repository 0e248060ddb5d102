use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::net::LatticeKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercolationResult {
    pub kind: LatticeKind,
    #[serde(rename = "L")]
    pub size: usize,
    pub p: f64,
    pub trials: usize,
    /// Fraction of trials with a spanning cluster.
    pub spanning: f64,
    pub stderr: f64,
    pub seed: u64,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Lattice patch `[0, L)^dims` in row-major order, axis 0 slowest.
struct Patch {
    /// Forward neighbours of each site.
    forward: Vec<Vec<usize>>,
    left: Vec<bool>,
    right: Vec<bool>,
}

impl Patch {
    fn new(size: usize, dims: usize, steps: &[Vec<i32>]) -> Self {
        let n = size.pow(dims as u32);
        let coords = |mut i: usize| {
            let mut c = vec![0i64; dims];
            for a in (0..dims).rev() {
                c[a] = (i % size) as i64;
                i /= size;
            }
            c
        };
        let mut forward = vec![Vec::new(); n];
        let mut left = vec![false; n];
        let mut right = vec![false; n];
        for (i, fwd) in forward.iter_mut().enumerate() {
            let c = coords(i);
            left[i] = c[0] == 0;
            right[i] = c[0] == size as i64 - 1;
            for s in steps {
                let next: Option<usize> = c.iter().zip(s).try_fold(0usize, |acc, (x, d)| {
                    let y = x + *d as i64;
                    (0..size as i64).contains(&y).then(|| acc * size + y as usize)
                });
                fwd.extend(next);
            }
        }
        Patch { forward, left, right }
    }

    fn len(&self) -> usize {
        self.forward.len()
    }

    /// Whether one trial's occupation spans from the `x = 0` face to the
    /// `x = L−1` face.
    fn spans(&self, occupied: &[bool]) -> bool {
        let n = self.len();
        let (left, right) = (n, n + 1);
        let mut uf = UnionFind::new(n + 2);
        for i in (0..n).filter(|&i| occupied[i]) {
            if self.left[i] {
                uf.union(i, left);
            }
            if self.right[i] {
                uf.union(i, right);
            }
            for &j in &self.forward[i] {
                if occupied[j] {
                    uf.union(i, j);
                }
            }
        }
        uf.find(left) == uf.find(right)
    }
}

/// Monte Carlo spanning frequency for site percolation with occupation
/// probability `p` on an `L^dims` patch. Trial `r` draws from stream `r` of
/// a generator seeded with `seed`, so results do not depend on threading.
pub fn percolation_estimate(kind: LatticeKind, size: usize, p: f64, trials: usize, seed: u64) -> Result<PercolationResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("occupation probability {p} outside [0, 1]")));
    }
    if size < 2 {
        return Err(invalid("patch size must be at least 2"));
    }
    if trials < 1 {
        return Err(invalid("at least one trial is needed"));
    }
    let patch = Patch::new(size, kind.dims(), &kind.directions());
    let hits: usize = (0..trials)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let occupied: Vec<bool> = (0..patch.len()).map(|_| rng.random::<f64>() < p).collect();
            patch.spans(&occupied) as usize
        })
        .sum();
    let f = hits as f64 / trials as f64;
    Ok(PercolationResult {
        kind,
        size,
        p,
        trials,
        spanning: f,
        stderr: (f * (1.0 - f) / trials as f64).sqrt(),
        seed,
    })
}
