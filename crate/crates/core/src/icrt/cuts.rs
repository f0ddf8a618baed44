use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::realtree::{line_break, RealTree};
use super::theta::ThetaParam;

/// A point of a [`RealTree`]: `offset` above `vertex` along its parent edge.
/// Branch-point atoms have offset 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub vertex: usize,
    pub offset: f64,
}

/// `theta0^2 * length + sum of theta_i delta_{beta_i}` restricted to a
/// reduced tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutMeasure {
    pub skeleton_density: f64,
    pub length: f64,
    /// `(vertex of beta_i, theta_i)`.
    pub atoms: Vec<(usize, f64)>,
}

impl CutMeasure {
    pub fn skeleton_mass(&self) -> f64 {
        self.skeleton_density * self.length
    }

    pub fn total_mass(&self) -> f64 {
        self.skeleton_mass() + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }
}

pub fn restricted_cut_measure(rt: &RealTree) -> CutMeasure {
    let th0 = rt.theta.theta0();
    CutMeasure {
        skeleton_density: th0 * th0,
        length: rt.total_length(),
        atoms: rt.branch_points.iter().map(|b| (b.vertex, b.local_time)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutAtom {
    pub time: f64,
    pub location: TreePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutPointProcess {
    pub atoms: Vec<CutAtom>,
    pub horizon: f64,
}

/// Draws a location from the cut measure.
fn sample_location<R: Rng + ?Sized>(rt: &RealTree, m: &CutMeasure, rng: &mut R) -> TreePoint {
    let mut x = rng.random::<f64>() * m.total_mass();
    if x < m.skeleton_mass() {
        x /= m.skeleton_density;
        for v in 1..rt.num_vertices() {
            let len = rt.edge_length(v);
            if x < len {
                return TreePoint { vertex: v, offset: x };
            }
            x -= len;
        }
        // rounding at the far end
        let v = (1..rt.num_vertices()).rev().find(|&v| rt.edge_length(v) > 0.0).unwrap_or(0);
        return TreePoint {
            vertex: v,
            offset: rt.edge_length(v) * 0.5,
        };
    }
    x -= m.skeleton_mass();
    for &(v, t) in &m.atoms {
        if x < t {
            return TreePoint { vertex: v, offset: 0.0 };
        }
        x -= t;
    }
    TreePoint {
        vertex: m.atoms.last().expect("positive atom mass").0,
        offset: 0.0,
    }
}

/// Poisson cuts on `[0, horizon] x R_k` with intensity `dt x cut measure`.
pub fn simulate_cuts<R: Rng + ?Sized>(rt: &RealTree, horizon: f64, rng: &mut R) -> Result<CutPointProcess> {
    if !(horizon > 0.0) {
        return Err(Error::Degenerate(format!("horizon {horizon} must be positive")));
    }
    let m = restricted_cut_measure(rt);
    let mass = m.total_mass();
    let mut atoms = Vec::new();
    if mass > 0.0 {
        let mut t = 0.0;
        loop {
            t += rng.sample::<f64, _>(Exp1) / mass;
            if t > horizon {
                break;
            }
            atoms.push(CutAtom {
                time: t,
                location: sample_location(rt, &m, rng),
            });
        }
    }
    Ok(CutPointProcess { atoms, horizon })
}

/// Whether `pt` lies on the path between vertices `a` and `b`.
pub fn on_path(rt: &RealTree, a: usize, b: usize, pt: TreePoint) -> bool {
    let c = rt.lca(a, b);
    let v = pt.vertex;
    if pt.offset > 0.0 {
        // the open edge above v
        v != c && rt.is_ancestor(c, v) && (rt.is_ancestor(v, a) || rt.is_ancestor(v, b))
    } else {
        rt.is_ancestor(c, v) && (rt.is_ancestor(v, a) || rt.is_ancestor(v, b))
    }
}

/// The earliest cut on the path between leaves `xi_i` and `xi_j`.
pub fn first_separation(rt: &RealTree, cuts: &CutPointProcess, i: usize, j: usize) -> Result<Option<CutAtom>> {
    let (a, b) = (rt.leaf(i)?, rt.leaf(j)?);
    Ok(cuts.atoms.iter().find(|c| on_path(rt, a, b, c.location)).copied())
}

/// Output of [`genealogy_matrix`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Genealogy {
    /// Index 0 is the root `rho_*`, index `i` is `U_i`.
    pub matrix: Vec<Vec<f64>>,
    /// `L^i_infinity` per target.
    pub l_infinity: Vec<f64>,
    /// `tau(i, j)`, `None` when the two targets were never separated.
    pub split_times: Vec<Vec<Option<f64>>>,
    pub final_time: f64,
    pub cut_count: usize,
    /// Largest estimated target mass left at `final_time`; 0 unless the
    /// horizon stopped the run.
    pub residual_mass: f64,
    pub truncated: bool,
}

struct Components {
    label: Vec<usize>,
    /// per label: (skeleton length, atom mass, auxiliary leaves)
    stats: Vec<(f64, f64, usize)>,
    /// per label: open segments `(edge, lo, hi)` and atom vertices
    segments: Vec<Vec<(usize, f64, f64)>>,
    atoms: Vec<Vec<usize>>,
}

const UNSEEN: usize = usize::MAX;

struct CutState<'a> {
    rt: &'a RealTree,
    children: Vec<Vec<usize>>,
    atom_theta: Vec<f64>,
    edge_cuts: Vec<Vec<f64>>,
    removed: Vec<bool>,
    aux: Vec<bool>,
}

impl CutState<'_> {
    fn open(&self, v: usize) -> bool {
        self.edge_cuts[v].is_empty()
    }

    fn components(&self, starts: &[usize]) -> Components {
        let nv = self.rt.num_vertices();
        let mut c = Components {
            label: vec![UNSEEN; nv],
            stats: Vec::new(),
            segments: Vec::new(),
            atoms: Vec::new(),
        };
        let mut queue = Vec::new();
        for &s in starts {
            if c.label[s] != UNSEEN {
                continue;
            }
            let id = c.stats.len();
            let (mut len, mut amass, mut aux) = (0.0, 0.0, 0);
            let mut segs = Vec::new();
            let mut atoms = Vec::new();
            queue.clear();
            queue.push(s);
            c.label[s] = id;
            let mut i = 0;
            while i < queue.len() {
                let u = queue[i];
                i += 1;
                aux += usize::from(self.aux[u]);
                if self.atom_theta[u] > 0.0 {
                    amass += self.atom_theta[u];
                    atoms.push(u);
                }
                if let Some(p) = self.rt.parent(u) {
                    let l = self.rt.edge_length(u);
                    if self.open(u) {
                        segs.push((u, 0.0, l));
                        len += l;
                        if !self.removed[p] && c.label[p] == UNSEEN {
                            c.label[p] = id;
                            queue.push(p);
                        }
                    } else {
                        let lo = self.edge_cuts[u][0];
                        segs.push((u, 0.0, lo));
                        len += lo;
                    }
                }
                for &w in &self.children[u] {
                    let l = self.rt.edge_length(w);
                    if self.open(w) {
                        if self.removed[w] {
                            segs.push((w, 0.0, l));
                            len += l;
                        } else if c.label[w] == UNSEEN {
                            c.label[w] = id;
                            queue.push(w);
                        }
                    } else {
                        let hi = *self.edge_cuts[w].last().unwrap();
                        segs.push((w, hi, l));
                        len += l - hi;
                    }
                }
            }
            c.stats.push((len, amass, aux));
            c.segments.push(segs);
            c.atoms.push(atoms);
        }
        c
    }

    fn cut_at<R: Rng + ?Sized>(&mut self, comps: &Components, live: &[usize], th0sq: f64, rng: &mut R) {
        let mass = |id: usize| th0sq * comps.stats[id].0 + comps.stats[id].1;
        let total: f64 = live.iter().map(|&id| mass(id)).sum();
        let mut x = rng.random::<f64>() * total;
        let mut chosen = *live.last().unwrap();
        for &id in live {
            if x < mass(id) {
                chosen = id;
                break;
            }
            x -= mass(id);
        }
        let (len, _, _) = comps.stats[chosen];
        let mut x = x.min(mass(chosen));
        if x < th0sq * len {
            x /= th0sq;
            let segs = &comps.segments[chosen];
            let mut pick = *segs.last().unwrap();
            let mut at = pick.2;
            for &(e, lo, hi) in segs {
                if x < hi - lo {
                    pick = (e, lo, hi);
                    at = lo + x;
                    break;
                }
                x -= hi - lo;
            }
            let cuts = &mut self.edge_cuts[pick.0];
            let pos = cuts.partition_point(|&c| c < at);
            cuts.insert(pos, at);
        } else {
            x -= th0sq * len;
            let atoms = &comps.atoms[chosen];
            let mut v = *atoms.last().unwrap();
            for &a in atoms {
                if x < self.atom_theta[a] {
                    v = a;
                    break;
                }
                x -= self.atom_theta[a];
            }
            self.removed[v] = true;
        }
    }
}

/// Estimates the genealogy of the fragmentation seen from `k` random
/// targets, using `m` auxiliary leaves for the component masses.
///
/// Cuts are only simulated on components that still carry auxiliary
/// leaves next to a target; the run stops once none does or once `horizon`
/// is reached.
pub fn genealogy_matrix<R: Rng + ?Sized>(
    theta: &ThetaParam,
    k: usize,
    m: usize,
    horizon: Option<f64>,
    rng: &mut R,
) -> Result<Genealogy> {
    if k == 0 || m == 0 {
        return Err(Error::Degenerate("genealogy needs k >= 1 and m >= 1".into()));
    }
    let horizon = horizon.unwrap_or(f64::INFINITY);
    if !(horizon > 0.0) {
        return Err(Error::Degenerate(format!("horizon {horizon} must be positive")));
    }
    let rt = line_break(theta, k + m, rng)?;
    genealogy_on(&rt, k, horizon, rng)
}

/// [`genealogy_matrix`] on a given tree whose first `k` leaves are the
/// targets and the rest are auxiliary.
pub fn genealogy_on<R: Rng + ?Sized>(rt: &RealTree, k: usize, horizon: f64, rng: &mut R) -> Result<Genealogy> {
    let m = rt.num_leaves().checked_sub(k).filter(|&m| m > 0 && k > 0).ok_or_else(|| {
        Error::Degenerate("need at least one target and one auxiliary leaf".into())
    })?;
    let nv = rt.num_vertices();
    let mut atom_theta = vec![0.0; nv];
    for b in &rt.branch_points {
        atom_theta[b.vertex] = b.local_time;
    }
    let mut aux = vec![false; nv];
    for &v in &rt.leaves[k..] {
        aux[v] = true;
    }
    let mut st = CutState {
        rt,
        children: rt.children(),
        atom_theta,
        edge_cuts: vec![Vec::new(); nv],
        removed: vec![false; nv],
        aux,
    };
    let th0sq = rt.theta.theta0() * rt.theta.theta0();
    let targets = &rt.leaves[..k];
    let mf = m as f64;

    let mut l = vec![0.0; k];
    let mut l_split = vec![vec![None; k]; k];
    let mut split_times = vec![vec![None; k]; k];
    let mut t = 0.0;
    let mut cut_count = 0;
    let mut comps = st.components(targets);
    let mut mu: Vec<f64> = targets.iter().map(|&v| comps.stats[comps.label[v]].2 as f64 / mf).collect();
    let mut truncated = false;
    loop {
        let mut live: Vec<usize> = (0..k).filter(|&i| mu[i] > 0.0).map(|i| comps.label[targets[i]]).collect();
        live.sort_unstable();
        live.dedup();
        if live.is_empty() {
            break;
        }
        let mass: f64 = live.iter().map(|&id| th0sq * comps.stats[id].0 + comps.stats[id].1).sum();
        let dt = if mass > 0.0 {
            rng.sample::<f64, _>(Exp1) / mass
        } else {
            f64::INFINITY
        };
        if t + dt > horizon {
            for i in 0..k {
                l[i] += mu[i] * (horizon - t);
            }
            t = horizon;
            truncated = true;
            break;
        }
        t += dt;
        for i in 0..k {
            l[i] += mu[i] * dt;
        }
        st.cut_at(&comps, &live, th0sq, rng);
        cut_count += 1;
        comps = st.components(targets);
        for i in 0..k {
            mu[i] = comps.stats[comps.label[targets[i]]].2 as f64 / mf;
            for j in 0..k {
                if i != j && split_times[i][j].is_none() && comps.label[targets[i]] != comps.label[targets[j]] {
                    split_times[i][j] = Some(t);
                    l_split[i][j] = Some(l[i]);
                }
            }
        }
    }
    let residual_mass = if truncated { mu.iter().copied().fold(0.0, f64::max) } else { 0.0 };
    let mut matrix = vec![vec![0.0; k + 1]; k + 1];
    for i in 0..k {
        matrix[0][i + 1] = l[i];
        matrix[i + 1][0] = l[i];
        for j in 0..k {
            if i != j {
                // never split: same component throughout, so L^i = L^j
                let li_tau = l_split[i][j].unwrap_or(l[i]);
                matrix[i + 1][j + 1] = l[i] + l[j] - 2.0 * li_tau;
            }
        }
    }
    // symmetrize the rounding in L^i_tau vs L^j_tau
    for i in 1..=k {
        for j in i + 1..=k {
            let d = 0.5 * (matrix[i][j] + matrix[j][i]);
            matrix[i][j] = d;
            matrix[j][i] = d;
        }
    }
    Ok(Genealogy {
        matrix,
        l_infinity: l,
        split_times,
        final_time: t,
        cut_count,
        residual_mass,
        truncated,
    })
}
