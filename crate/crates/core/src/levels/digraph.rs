use rug::Rational;

use crate::numeric::Real;

use super::kernel::LevelKernel;

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub index: usize,
    pub weights: Vec<u32>,
    pub fitness: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arc<T> {
    pub from: usize,
    pub to: usize,
    pub p_min: T,
    pub p_max: T,
    /// The arc jumps past a level in a detected weak shortcut.
    pub weak_shortcut: bool,
    /// The arc jumps past a block in a detected strong shortcut.
    pub strong_shortcut: bool,
}

/// Vertices are levels, arcs are the transitions with `p_min > 0`.
#[derive(Clone, Debug)]
pub struct LevelDigraph<T> {
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<Arc<T>>,
}

impl<T: Real> LevelDigraph<T> {
    pub fn new(kernel: &LevelKernel<T>) -> Self {
        let partition = kernel.partition();
        let vertices = partition
            .levels()
            .iter()
            .enumerate()
            .map(|(index, level)| Vertex {
                index,
                weights: level.weights.clone(),
                fitness: level.fitness.clone(),
            })
            .collect();
        let mut arcs = Vec::new();
        for k in 1..=kernel.top() {
            for l in 0..k {
                if kernel.p_min(k, l).is_zero() {
                    continue;
                }
                arcs.push(Arc {
                    from: k,
                    to: l,
                    p_min: kernel.p_min(k, l).clone(),
                    p_max: kernel.p_max(k, l).clone(),
                    weak_shortcut: false,
                    strong_shortcut: false,
                });
            }
        }
        LevelDigraph { vertices, arcs }
    }

    pub fn arc(&self, from: usize, to: usize) -> Option<&Arc<T>> {
        self.arcs.iter().find(|a| a.from == from && a.to == to)
    }

    /// Direct successors of `k`, nearest level first.
    pub fn successors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let mut out: Vec<usize> = self.arcs.iter().filter(|a| a.from == k).map(|a| a.to).collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out.into_iter()
    }
}
