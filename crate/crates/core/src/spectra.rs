//! Sector-blocked diagonalization and level continuation in the electric
//! field.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
// Needed for float math without std; redundant when std is linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::model::{self, ChainParams, OperatorMatrix};

/// Tolerance on `|H - H^dagger|` and `|[H, Sz]|`, relative to `max(1, |H|)`.
const STRUCTURE_TOL: f64 = 1e-12;

/// Relative energy tolerance for grouping degenerate levels.
const DEGENERACY_TOL: f64 = 1e-9;

/// Minimal `|<v|w>|` accepted when following a level across one step.
pub const OVERLAP_THRESHOLD: f64 = 0.7;

/// Default number of continuation steps per unit change of the field.
pub const STEPS_PER_UNIT: usize = 64;

/// Maximal local refinement exponent: a failing step is split into up to
/// `2^MAX_REFINE` sub-steps.
pub const MAX_REFINE: u32 = 10;

/// Overlap weight below which a level pair is treated as unrelated when
/// grouping levels for matching.
const LINK_WEIGHT: f64 = 0.05;

/// Eigen-decomposition of one magnetization block.
#[derive(Debug, Clone)]
pub struct SectorBlock {
    pub sz: i32,
    /// Basis states spanning the block, ascending.
    pub states: Vec<usize>,
    /// Block eigenvalues, ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors in block coordinates, one column per eigenvalue.
    pub vectors: CMatrix,
}

/// Full spectrum of a chain Hamiltonian. Levels are sorted by energy
/// (ties by sector then block position) and carry their total `sigma^z`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    energies: Vec<f64>,
    sz: Vec<i32>,
    /// `(block, column)` of each global level.
    origin: Vec<(usize, usize)>,
    blocks: Vec<SectorBlock>,
}

impl Spectrum {
    /// Diagonalizes the chain described by `params` block by block, without
    /// forming the full matrix.
    pub fn from_params(params: &ChainParams) -> Result<Self> {
        params.validate()?;
        let blocks = model::sector_bases(params.n)
            .into_iter()
            .map(|basis| {
                let h = model::sector_hamiltonian(params, &basis)?;
                let (energies, vectors) = linalg::eigh(&h)?;
                Ok(SectorBlock { sz: basis.sz, states: basis.states, energies, vectors })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::assemble(params.dim(), blocks))
    }

    fn assemble(dim: usize, blocks: Vec<SectorBlock>) -> Self {
        let mut origin: Vec<(usize, usize)> = Vec::with_capacity(dim);
        for (b, block) in blocks.iter().enumerate() {
            origin.extend((0..block.energies.len()).map(|k| (b, k)));
        }
        let energy_of = |&(b, k): &(usize, usize)| blocks[b].energies[k];
        origin.sort_by(|x, y| energy_of(x).total_cmp(&energy_of(y)).then(x.cmp(y)));
        let energies = origin.iter().map(energy_of).collect();
        let sz = origin.iter().map(|&(b, _)| blocks[b].sz).collect();
        Self { dim, energies, sz, origin, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of chain sites when the dimension is a power of two.
    pub fn sites(&self) -> Option<usize> {
        self.dim.is_power_of_two().then(|| self.dim.trailing_zeros() as usize)
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Energies, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Total `sigma^z` of each level.
    pub fn sz_labels(&self) -> &[i32] {
        &self.sz
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies.first().copied().unwrap_or(0.0)
    }

    pub fn blocks(&self) -> &[SectorBlock] {
        &self.blocks
    }

    /// Eigenvector of level `k` in the full basis.
    pub fn state(&self, k: usize) -> CVector {
        let (b, col) = self.origin[k];
        let block = &self.blocks[b];
        let mut v = CVector::zeros(self.dim);
        for (local, &s) in block.states.iter().enumerate() {
            v[s] = block.vectors[(local, col)];
        }
        v
    }

    /// All eigenvectors as columns of a unitary matrix, in level order.
    pub fn states(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (k, &(b, col)) in self.origin.iter().enumerate() {
            let block = &self.blocks[b];
            for (local, &s) in block.states.iter().enumerate() {
                m[(s, k)] = block.vectors[(local, col)];
            }
        }
        m
    }

    /// `sum_k w_k |v_k><v_k|` for per-level weights, built block by block.
    pub fn weighted_sum(&self, weights: &[f64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        let mut per_block: Vec<Vec<f64>> = self.blocks.iter().map(|b| vec![0.0; b.energies.len()]).collect();
        for (k, &(b, col)) in self.origin.iter().enumerate() {
            per_block[b][col] = weights[k];
        }
        for (block, w) in self.blocks.iter().zip(&per_block) {
            let local = linalg::weighted_projector_sum(&block.vectors, w);
            for (i, &si) in block.states.iter().enumerate() {
                for (j, &sj) in block.states.iter().enumerate() {
                    out[(si, sj)] = local[(i, j)];
                }
            }
        }
        out
    }

    /// Spectrum of `H - h * Sz`. The field couples only to the conserved
    /// magnetization, so eigenvectors are unchanged and every level moves by
    /// exactly `-h * sz`.
    pub fn zeeman_shifted(&self, h: f64) -> Spectrum {
        let blocks = self
            .blocks
            .iter()
            .map(|b| SectorBlock {
                sz: b.sz,
                states: b.states.clone(),
                energies: b.energies.iter().map(|e| e - h * b.sz as f64).collect(),
                vectors: b.vectors.clone(),
            })
            .collect();
        Self::assemble(self.dim, blocks)
    }

    fn global_index_table(&self) -> Vec<Vec<usize>> {
        let mut table: Vec<Vec<usize>> = self.blocks.iter().map(|b| vec![0; b.energies.len()]).collect();
        for (k, &(b, col)) in self.origin.iter().enumerate() {
            table[b][col] = k;
        }
        table
    }
}

/// Diagonalizes a Hermitian `h` that conserves the diagonal operator `sz`.
pub fn diagonalize(h: &OperatorMatrix, sz: &OperatorMatrix) -> Result<Spectrum> {
    let dim = h.dim();
    if sz.dim() != dim {
        return Err(Error::Dimension { expected: dim, got: sz.dim() });
    }
    let scale = h.max_abs().max(1.0);
    let defect = h.hermiticity_defect();
    if defect > STRUCTURE_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    let sz_m = sz.matrix();
    for i in 0..dim {
        for j in 0..dim {
            if i != j && sz_m[(i, j)] != Complex64::new(0.0, 0.0) {
                return Err(invalid("magnetization operator must be diagonal"));
            }
        }
    }
    let leak = h.commutator(sz).max_abs();
    if leak > STRUCTURE_TOL * scale {
        return Err(Error::NotConserved(leak));
    }
    let label = |s: usize| sz_m[(s, s)].re.round() as i32;
    let mut labels: Vec<i32> = (0..dim).map(label).collect();
    labels.sort_unstable_by(|a, b| b.cmp(a));
    labels.dedup();
    let hm = h.matrix();
    let blocks = labels
        .into_iter()
        .map(|sz_value| {
            let states: Vec<usize> = (0..dim).filter(|&s| label(s) == sz_value).collect();
            let m = states.len();
            let block = CMatrix::from_fn(m, m, |i, j| hm[(states[i], states[j])]);
            let (energies, vectors) = linalg::eigh(&block)?;
            Ok(SectorBlock { sz: sz_value, states, energies, vectors })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::assemble(dim, blocks))
}

/// Eigenvalues of the full matrix without sector blocking.
pub fn dense_energies(h: &OperatorMatrix) -> Result<Vec<f64>> {
    linalg::eigvalsh(h.matrix())
}

/// Level identification between two values of the electric field:
/// `permutation[i]` is the index at `d_to` of the level that sits at index
/// `i` at `d_from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMap {
    permutation: Vec<usize>,
}

impl LevelMap {
    pub fn identity(len: usize) -> Self {
        Self { permutation: (0..len).collect() }
    }

    pub fn from_permutation(permutation: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; permutation.len()];
        for &p in &permutation {
            if p >= seen.len() || seen[p] {
                return Err(invalid("level map must be a permutation"));
            }
            seen[p] = true;
        }
        Ok(Self { permutation })
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    pub fn map(&self, from: usize) -> usize {
        self.permutation[from]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.permutation
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &LevelMap) -> LevelMap {
        LevelMap { permutation: self.permutation.iter().map(|&p| next.permutation[p]).collect() }
    }

    pub fn inverse(&self) -> LevelMap {
        let mut inv = vec![0; self.permutation.len()];
        for (i, &p) in self.permutation.iter().enumerate() {
            inv[p] = i;
        }
        LevelMap { permutation: inv }
    }
}

/// Sample points strictly inside a path are offset from the uniform grid by
/// this fraction of a step, so that they avoid the rational field values
/// where symmetry-protected crossings tend to sit.
const GRID_OFFSET: f64 = 0.118_033_988_749_894_8;

fn interior_point(a: f64, b: f64, k: usize, steps: usize) -> f64 {
    if k == 0 {
        a
    } else if k == steps {
        b
    } else {
        a + (b - a) * ((k as f64 + GRID_OFFSET) / steps as f64)
    }
}

/// Follows every level adiabatically from `d_from` to `d_to` by matching
/// eigenvectors within each magnetization sector over `steps` uniform steps.
/// A step whose matching is ambiguous is subdivided locally, up to
/// `2^MAX_REFINE` sub-steps.
pub fn continue_levels(params: &ChainParams, d_from: f64, d_to: f64, steps: usize) -> Result<LevelMap> {
    params.validate()?;
    if steps == 0 {
        return Err(invalid("continuation needs at least one step"));
    }
    if !d_from.is_finite() || !d_to.is_finite() {
        return Err(invalid("continuation endpoints must be finite"));
    }
    let at = |d: f64| Spectrum::from_params(&params.with_e_field(d));
    let mut current = at(d_from)?;
    let mut map = LevelMap::identity(current.len());
    if d_from == d_to {
        return Ok(map);
    }
    for k in 0..steps {
        let a = interior_point(d_from, d_to, k, steps);
        let b = interior_point(d_from, d_to, k + 1, steps);
        let next = at(b)?;
        let step = match match_levels(&current, &next) {
            Ok(m) => m,
            Err(_) => refine(&at, &current, &next, a, b)?,
        };
        map = map.then(&step);
        current = next;
    }
    Ok(map)
}

/// Convenience wrapper using [`STEPS_PER_UNIT`] steps per unit field change.
pub fn continue_levels_default(params: &ChainParams, d_from: f64, d_to: f64) -> Result<LevelMap> {
    let steps = ((d_to - d_from).abs() * STEPS_PER_UNIT as f64).ceil().max(1.0) as usize;
    continue_levels(params, d_from, d_to, steps)
}

fn refine(at: &impl Fn(f64) -> Result<Spectrum>, start: &Spectrum, end: &Spectrum, a: f64, b: f64) -> Result<LevelMap> {
    let mut worst = 0.0;
    for level in 1..=MAX_REFINE {
        let sub = 1usize << level;
        let mut map = LevelMap::identity(start.len());
        let mut prev = start.clone();
        let mut failed = None;
        for k in 0..sub {
            let next = if k + 1 == sub { end.clone() } else { at(interior_point(a, b, k + 1, sub))? };
            match match_levels(&prev, &next) {
                Ok(m) => map = map.then(&m),
                Err(score) => {
                    failed = Some(score);
                    break;
                }
            }
            prev = next;
        }
        match failed {
            None => return Ok(map),
            Some(score) => worst = score,
        }
    }
    Err(Error::Continuation { from: a, to: b, overlap: worst })
}

/// One continuation step. On failure returns the offending overlap.
fn match_levels(a: &Spectrum, b: &Spectrum) -> core::result::Result<LevelMap, f64> {
    let ia = a.global_index_table();
    let ib = b.global_index_table();
    let mut perm = vec![usize::MAX; a.len()];
    for (bi, (ba, bb)) in a.blocks.iter().zip(&b.blocks).enumerate() {
        let local = match_block(ba, bb)?;
        for (i, j) in local.into_iter().enumerate() {
            perm[ia[bi][i]] = ib[bi][j];
        }
    }
    Ok(LevelMap { permutation: perm })
}

fn degenerate(x: f64, y: f64) -> bool {
    (x - y).abs() <= DEGENERACY_TOL * x.abs().max(y.abs()).max(1.0)
}

/// Matches the levels of one sector block between two nearby fields.
///
/// Levels are grouped into components of the bipartite overlap graph. A
/// component must pair equally many levels on both sides; if it holds more
/// than one level per side, one side must be a single degenerate multiplet
/// (otherwise the identification is ambiguous). Inside a component, pairs are
/// assigned greedily by overlap, ties to the lower indices.
fn match_block(a: &SectorBlock, b: &SectorBlock) -> core::result::Result<Vec<usize>, f64> {
    let m = a.energies.len();
    let overlap = a.vectors.adjoint() * &b.vectors;
    let w = |i: usize, j: usize| overlap[(i, j)].norm_sqr();

    // union-find over 0..m (side a) and m..2m (side b)
    let mut parent: Vec<usize> = (0..2 * m).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..m {
        for j in 0..m {
            if w(i, j) >= LINK_WEIGHT {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, m + j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut root_slot = vec![usize::MAX; 2 * m];
    for x in 0..2 * m {
        let r = find(&mut parent, x);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push((Vec::new(), Vec::new()));
        }
        let g = &mut groups[root_slot[r]];
        if x < m {
            g.0.push(x);
        } else {
            g.1.push(x - m);
        }
    }

    let mut result = vec![usize::MAX; m];
    for (left, right) in &groups {
        let total: f64 = left.iter().flat_map(|&i| right.iter().map(move |&j| (i, j))).map(|(i, j)| w(i, j)).sum();
        let size = left.len().max(right.len()).max(1);
        let score = (total / size as f64).sqrt();
        if left.len() != right.len() || score < OVERLAP_THRESHOLD {
            return Err(score);
        }
        if left.len() > 1 {
            let multiplet = |idx: &[usize], e: &[f64]| idx.iter().all(|&k| degenerate(e[k], e[idx[0]]));
            if !multiplet(left, &a.energies) && !multiplet(right, &b.energies) {
                return Err(score);
            }
        }
        let mut pairs: Vec<(f64, usize, usize)> =
            left.iter().flat_map(|&i| right.iter().map(move |&j| (i, j))).map(|(i, j)| (w(i, j), i, j)).collect();
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut used = vec![false; m];
        for (_, i, j) in pairs {
            if result[i] == usize::MAX && !used[j] {
                result[i] = j;
                used[j] = true;
            }
        }
    }
    Ok(result)
}

/// Residual `max_k |H v_k - E_k v_k|` of a spectrum against a dense matrix.
pub fn max_residual(h: &OperatorMatrix, spec: &Spectrum) -> f64 {
    let hm = h.matrix();
    (0..spec.len())
        .map(|k| {
            let v = spec.state(k);
            (hm * &v - v.scale(spec.energies()[k])).norm()
        })
        .fold(0.0, f64::max)
}
