// SPDX-License-Identifier: Apache-2.0

//! Fixed-step RK4 for dρ/dt = −i[H, ρ] + κ(aρa† − ½{a†a, ρ}) on a
//! block-sparse density matrix.
//!
//! The generator is rewritten with H_eff = H − (iκ/2)a†a as
//!
//!   dρ/dt = −i(H_eff ρ − ρ H_eff†) + κ aρa†,
//!
//! which is the same expression term by term. Basis states are grouped into
//! sectors, the connected components of H_eff's coupling graph. If `a` maps
//! every sector into a single sector and ρ(0) has no entries between
//! sectors, ρ(t) stays block diagonal and only the diagonal blocks are
//! stored. Sectors are merged until that holds.
//!
//! For the two Hamiltonians here the sectors are the excitation-number
//! manifolds (RWA) or the two excitation-parity classes (full coupling).

use nalgebra::DMatrix;

use crate::operators::ZERO;
use crate::C64;

#[derive(Clone, Debug)]
struct Sector {
    /// Full-space indices, ascending.
    indices: Vec<usize>,
    offset: usize,
}

impl Sector {
    fn size(&self) -> usize {
        self.indices.len()
    }
}

/// Sparse rows of `a` restricted to (target sector ← source sector).
#[derive(Clone, Debug)]
struct JumpBlock {
    target: usize,
    source: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

#[derive(Clone, Debug)]
pub(crate) struct SectorPropagator {
    dim: usize,
    sectors: Vec<Sector>,
    /// −i(h_i − h_j*) for the diagonal of H_eff, laid out like the state.
    decay: Vec<C64>,
    /// Per sector, per local row i: (k, −i·H_eff[i,k]) for k ≠ i.
    left: Vec<Vec<Vec<(usize, C64)>>>,
    /// Per sector, per local column j: (k, +i·conj(H_eff[j,k])) for k ≠ j.
    right: Vec<Vec<Vec<(usize, C64)>>>,
    jumps: Vec<JumpBlock>,
    kappa: f64,
    len: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, i: usize, j: usize) -> bool {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri == rj {
            return false;
        }
        self.parent[ri.max(rj)] = ri.min(rj);
        true
    }
}

/// Coarsest admissible sector labelling: H_eff never couples two sectors,
/// ρ(0) has no entries between sectors, and `a` maps each sector into one
/// sector. Labels are numbered by smallest member.
fn sector_labels(heff: &DMatrix<C64>, a: &DMatrix<C64>, rho0: &DMatrix<C64>) -> Vec<usize> {
    let dim = heff.nrows();
    let mut uf = UnionFind::new(dim);
    let mut jumps = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            if i != j && heff[(i, j)] != ZERO {
                uf.union(i, j);
            }
            if rho0[(i, j)] != ZERO {
                uf.union(i, j);
            }
            if a[(i, j)] != ZERO {
                jumps.push((i, j));
            }
        }
    }
    loop {
        let mut changed = false;
        let mut target = vec![None; dim];
        for &(i, k) in &jumps {
            let src = uf.find(k);
            match target[src] {
                None => target[src] = Some(i),
                Some(t) => changed |= uf.union(t, i),
            }
        }
        if !changed {
            break;
        }
    }
    let mut label = vec![usize::MAX; dim];
    let mut next = 0;
    for i in 0..dim {
        let r = uf.find(i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        label[i] = label[r];
    }
    label
}

impl SectorPropagator {
    /// `rho0` only decides whether the sector split is admissible.
    pub(crate) fn new(h: &DMatrix<C64>, kappa: f64, a: &DMatrix<C64>, rho0: &DMatrix<C64>) -> Self {
        let dim = h.nrows();
        let heff = h - (a.adjoint() * a) * C64::new(0.0, 0.5 * kappa);

        let label = sector_labels(&heff, a, rho0);

        let n_sectors = label.iter().max().map_or(0, |m| m + 1);
        let mut sectors: Vec<Sector> = (0..n_sectors)
            .map(|_| Sector {
                indices: Vec::new(),
                offset: 0,
            })
            .collect();
        for (i, &s) in label.iter().enumerate() {
            sectors[s].indices.push(i);
        }
        let mut offset = 0;
        for s in &mut sectors {
            s.offset = offset;
            offset += s.size() * s.size();
        }
        let len = offset;

        let minus_i = C64::new(0.0, -1.0);
        let plus_i = C64::new(0.0, 1.0);
        let mut decay = vec![ZERO; len];
        let mut left = Vec::with_capacity(n_sectors);
        let mut right = Vec::with_capacity(n_sectors);
        for s in &sectors {
            let m = s.size();
            for (li, &i) in s.indices.iter().enumerate() {
                for (lj, &j) in s.indices.iter().enumerate() {
                    decay[s.offset + li * m + lj] =
                        minus_i * heff[(i, i)] + plus_i * heff[(j, j)].conj();
                }
            }
            let mut l_rows = vec![Vec::new(); m];
            let mut r_rows = vec![Vec::new(); m];
            for (li, &i) in s.indices.iter().enumerate() {
                for (lk, &k) in s.indices.iter().enumerate() {
                    if li == lk {
                        continue;
                    }
                    let v = heff[(i, k)];
                    if v != ZERO {
                        l_rows[li].push((lk, minus_i * v));
                        r_rows[li].push((lk, plus_i * v.conj()));
                    }
                }
            }
            left.push(l_rows);
            right.push(r_rows);
        }

        let mut jumps = Vec::new();
        if kappa != 0.0 {
            for (t_idx, target) in sectors.iter().enumerate() {
                for (s_idx, source) in sectors.iter().enumerate() {
                    let rows: Vec<Vec<(usize, C64)>> = target
                        .indices
                        .iter()
                        .map(|&i| {
                            source
                                .indices
                                .iter()
                                .enumerate()
                                .filter(|&(_, &k)| a[(i, k)] != ZERO)
                                .map(|(lk, &k)| (lk, a[(i, k)]))
                                .collect()
                        })
                        .collect();
                    if rows.iter().any(|r| !r.is_empty()) {
                        jumps.push(JumpBlock {
                            target: t_idx,
                            source: s_idx,
                            rows,
                        });
                    }
                }
            }
        }

        Self {
            dim,
            sectors,
            decay,
            left,
            right,
            jumps,
            kappa,
            len,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    #[cfg(test)]
    pub(crate) fn sector_sizes(&self) -> Vec<usize> {
        self.sectors.iter().map(Sector::size).collect()
    }

    pub(crate) fn pack(&self, rho: &DMatrix<C64>) -> Vec<C64> {
        let mut x = vec![ZERO; self.len];
        for s in &self.sectors {
            let m = s.size();
            for (li, &i) in s.indices.iter().enumerate() {
                for (lj, &j) in s.indices.iter().enumerate() {
                    x[s.offset + li * m + lj] = rho[(i, j)];
                }
            }
        }
        x
    }

    pub(crate) fn unpack(&self, x: &[C64]) -> DMatrix<C64> {
        let mut rho = DMatrix::from_element(self.dim, self.dim, ZERO);
        for s in &self.sectors {
            let m = s.size();
            for (li, &i) in s.indices.iter().enumerate() {
                for (lj, &j) in s.indices.iter().enumerate() {
                    rho[(i, j)] = x[s.offset + li * m + lj];
                }
            }
        }
        rho
    }

    pub(crate) fn trace(&self, x: &[C64]) -> C64 {
        self.sectors
            .iter()
            .flat_map(|s| (0..s.size()).map(move |li| x[s.offset + li * s.size() + li]))
            .sum()
    }

    /// Diagonal blocks as dense matrices.
    pub(crate) fn blocks(&self, x: &[C64]) -> Vec<DMatrix<C64>> {
        self.sectors
            .iter()
            .map(|s| {
                let m = s.size();
                DMatrix::from_row_slice(m, m, &x[s.offset..s.offset + m * m])
            })
            .collect()
    }

    /// out = L(x).
    pub(crate) fn rhs(&self, x: &[C64], out: &mut [C64]) {
        for (s_idx, s) in self.sectors.iter().enumerate() {
            let m = s.size();
            let xs = &x[s.offset..s.offset + m * m];
            let os = &mut out[s.offset..s.offset + m * m];
            let decay = &self.decay[s.offset..s.offset + m * m];
            for ((o, &d), &v) in os.iter_mut().zip(decay).zip(xs) {
                *o = d * v;
            }
            let left = &self.left[s_idx];
            let right = &self.right[s_idx];
            for i in 0..m {
                let orow = &mut os[i * m..(i + 1) * m];
                for &(k, w) in &left[i] {
                    let xrow = &xs[k * m..(k + 1) * m];
                    for (o, &v) in orow.iter_mut().zip(xrow) {
                        *o += w * v;
                    }
                }
                let xrow = &xs[i * m..(i + 1) * m];
                for (j, o) in orow.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for &(k, w) in &right[j] {
                        acc += xrow[k] * w;
                    }
                    *o += acc;
                }
            }
        }
        for jump in &self.jumps {
            let src = &self.sectors[jump.source];
            let dst = &self.sectors[jump.target];
            let (ms, md) = (src.size(), dst.size());
            let xs = &x[src.offset..src.offset + ms * ms];
            let os = &mut out[dst.offset..dst.offset + md * md];
            for (i, row_i) in jump.rows.iter().enumerate() {
                if row_i.is_empty() {
                    continue;
                }
                for (j, row_j) in jump.rows.iter().enumerate() {
                    let mut acc = ZERO;
                    for &(k, alpha) in row_i {
                        for &(l, beta) in row_j {
                            acc += alpha * beta.conj() * xs[k * ms + l];
                        }
                    }
                    os[i * md + j] += acc * self.kappa;
                }
            }
        }
    }
}

/// Scratch buffers for repeated RK4 steps.
pub(crate) struct Rk4 {
    k: Vec<C64>,
    acc: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            k: vec![ZERO; len],
            acc: vec![ZERO; len],
            tmp: vec![ZERO; len],
        }
    }

    pub(crate) fn step(&mut self, prop: &SectorPropagator, x: &mut [C64], dt: f64) {
        let half = 0.5 * dt;
        prop.rhs(x, &mut self.k);
        self.acc.copy_from_slice(&self.k);
        for ((t, &xv), &kv) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k) {
            *t = xv + kv * half;
        }
        prop.rhs(&self.tmp, &mut self.k);
        for (((a, t), &xv), &kv) in self
            .acc
            .iter_mut()
            .zip(self.tmp.iter_mut())
            .zip(x.iter())
            .zip(&self.k)
        {
            *a += kv * 2.0;
            *t = xv + kv * half;
        }
        prop.rhs(&self.tmp, &mut self.k);
        for (((a, t), &xv), &kv) in self
            .acc
            .iter_mut()
            .zip(self.tmp.iter_mut())
            .zip(x.iter())
            .zip(&self.k)
        {
            *a += kv * 2.0;
            *t = xv + kv * dt;
        }
        prop.rhs(&self.tmp, &mut self.k);
        let sixth = dt / 6.0;
        for ((xv, &a), &kv) in x.iter_mut().zip(&self.acc).zip(&self.k) {
            *xv += (a + kv) * sixth;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{lindblad_rhs, FullState};
    use crate::model::{build_hamiltonian, initial_state, BellKind, Mode, SystemConfig};
    use crate::operators::{cavity_annihilation, max_abs, Operator};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_density(rng: &mut StdRng, d: usize) -> DMatrix<C64> {
        let g = DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = &g * g.adjoint();
        &m / m.trace()
    }

    fn setup(mode: Mode, d: f64) -> (Operator, Operator, SystemConfig) {
        let cfg = SystemConfig {
            n_max: 5,
            mode,
            distance: d,
            ..SystemConfig::default()
        };
        let h = build_hamiltonian(&cfg).unwrap();
        let a = cavity_annihilation(h.layout()).unwrap();
        (h, a, cfg)
    }

    #[test]
    fn sectors_follow_excitation_structure() {
        let (h, a, cfg) = setup(Mode::NonRwa, 0.1);
        let rho0 = initial_state(BellKind::S, h.layout());
        let p = SectorPropagator::new(h.matrix(), cfg.kappa, a.matrix(), rho0.rho());
        assert_eq!(p.sector_sizes(), vec![12, 12]);

        let (h, a, cfg) = setup(Mode::Rwa, 0.1);
        let p = SectorPropagator::new(h.matrix(), cfg.kappa, a.matrix(), rho0.rho());
        // N = 0, 1, then four states per manifold down to the truncation edge
        let mut sizes = p.sector_sizes();
        sizes.sort();
        assert_eq!(sizes.iter().sum::<usize>(), 24);
        assert_eq!(sizes[0], 1);
        assert!(sizes.iter().all(|&s| s <= 4));
    }

    #[test]
    fn merges_sectors_for_mixed_parity_input() {
        let (h, a, cfg) = setup(Mode::NonRwa, 0.0);
        let mut rng = StdRng::seed_from_u64(3);
        let rho = random_density(&mut rng, h.layout().total_dim());
        let p = SectorPropagator::new(h.matrix(), cfg.kappa, a.matrix(), &rho);
        assert_eq!(p.sector_sizes(), vec![24]);
        let state = FullState::new(h.layout().clone(), rho.clone(), 0.0).unwrap();
        let expected = lindblad_rhs(&state, &h, cfg.kappa, &a).unwrap();
        let mut out = vec![ZERO; p.len()];
        p.rhs(&p.pack(&rho), &mut out);
        assert!(max_abs(&(p.unpack(&out) - expected)) < 1e-13);
    }

    #[test]
    fn block_rhs_matches_dense_formula() {
        let mut rng = StdRng::seed_from_u64(5);
        for mode in Mode::ALL {
            for d in [0.0, 0.2, 0.5] {
                let (h, a, cfg) = setup(mode, d);
                let layout = h.layout().clone();
                let rho0 = initial_state(BellKind::S, &layout);
                let p = SectorPropagator::new(h.matrix(), cfg.kappa, a.matrix(), rho0.rho());
                // random state with the same block support
                let x = p.pack(&random_density(&mut rng, layout.total_dim()));
                let rho = p.unpack(&x);
                let state = FullState::new(layout.clone(), rho.clone(), 0.0).unwrap();
                let expected = lindblad_rhs(&state, &h, cfg.kappa, &a).unwrap();
                let mut out = vec![ZERO; p.len()];
                p.rhs(&x, &mut out);
                assert!(
                    max_abs(&(p.unpack(&out) - &expected)) < 1e-13,
                    "{mode} d={d}"
                );
                // dense RHS has nothing outside the blocks
                assert!(max_abs(&(p.unpack(&p.pack(&expected)) - &expected)) < 1e-13);
            }
        }
    }

    #[test]
    fn pack_round_trip_and_trace() {
        let (h, a, cfg) = setup(Mode::NonRwa, 0.0);
        let rho0 = initial_state(BellKind::Alpha, h.layout());
        let p = SectorPropagator::new(h.matrix(), cfg.kappa, a.matrix(), rho0.rho());
        let x = p.pack(rho0.rho());
        assert_eq!(&p.unpack(&x), rho0.rho());
        assert!((p.trace(&x) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rk4_step_matches_taylor_polynomial() {
        // one RK4 step of a linear ODE is Σ_{k≤4} (dt L)^k / k!
        let (h, a, cfg) = setup(Mode::NonRwa, 0.05);
        let layout = h.layout().clone();
        let rho0 = initial_state(BellKind::S, &layout);
        let p = SectorPropagator::new(h.matrix(), cfg.kappa, a.matrix(), rho0.rho());
        let dt = 0.01;
        let mut term = rho0.rho().clone();
        let mut expected = term.clone();
        for k in 1..=4 {
            let s = FullState::new(layout.clone(), term.clone(), 0.0).unwrap();
            term = lindblad_rhs(&s, &h, cfg.kappa, &a).unwrap() * C64::new(dt / k as f64, 0.0);
            expected += &term;
        }
        let mut x = p.pack(rho0.rho());
        Rk4::new(p.len()).step(&p, &mut x, dt);
        assert!(max_abs(&(p.unpack(&x) - expected)) < 1e-14);
    }
}
