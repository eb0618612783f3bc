//! The sequence space X of two-index Fourier-Chebyshev coefficients:
//! weights, l1_omega norms, the W0 rescaling, discrete convolution and
//! projections.
//!
//! Coefficient sequences are stored on a symmetry-reduced fundamental
//! domain (trigonometric coefficients). For products they are expanded to a
//! full exponential-coefficient box of real values with a power-of-i phase
//! tag; the convolution kernel works on boxes and results are folded back
//! into the reduced storage of the target symmetry class.

use crate::error::{Error, Result};
use crate::interval::{Dd, Interval};

/// Weights omega_{k,n} = (1 + s1 |k|_1)^{s2} nu^{|k|_1}, doubled for n >= 1.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WeightSpec {
    pub s1: f64,
    pub s2: f64,
    pub nu: f64,
}

impl WeightSpec {
    pub fn trivial() -> WeightSpec {
        WeightSpec {
            s1: 0.0,
            s2: 0.0,
            nu: 1.0,
        }
    }

    pub fn new(s1: f64, s2: f64, nu: f64) -> Result<WeightSpec> {
        if s1 < 0.0 || s2 < 0.0 || nu < 1.0 {
            return Err(Error::SpecError(
                "weights require s1, s2 >= 0 and nu >= 1".into(),
            ));
        }
        Ok(WeightSpec { s1, s2, nu })
    }

    pub fn is_trivial(&self) -> bool {
        (self.s2 == 0.0 || self.s1 == 0.0) && self.nu == 1.0
    }

    /// Spatial part sigma(k) = (1+s1|k|_1)^{s2} nu^{|k|_1} (n-independent).
    pub fn sigma(&self, k1norm: i64) -> Interval {
        if self.is_trivial() {
            return Interval::ONE;
        }
        let kn = Interval::point(k1norm as f64);
        let base = Interval::ONE.add(&kn.scale(self.s1));
        let pow = if self.s2 == 0.0 {
            Interval::ONE
        } else {
            base.ln().unwrap().scale(self.s2).exp()
        };
        let nupow = if self.nu == 1.0 {
            Interval::ONE
        } else {
            Interval::point(self.nu).ln().unwrap().mul(&kn).exp()
        };
        pow.mul(&nupow)
    }

    /// omega_{k,n}: sigma(|k|_1), doubled for n >= 1.
    pub fn omega(&self, k: [i32; 2], n: usize) -> Interval {
        let k1norm = k[0].unsigned_abs() as i64 + k[1].unsigned_abs() as i64;
        let s = self.sigma(k1norm);
        if n == 0 {
            s
        } else {
            s.scale(2.0)
        }
    }
}

/// The weight omega_{k,n} as a spec-level free function.
pub fn weight(w: &WeightSpec, k: [i32; 2], n: usize) -> Interval {
    w.omega(k, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Symmetry {
    /// 1-D, no symmetry: k >= 0 stores cosine coefficients, k < 0 sine.
    None,
    /// 1-D even: u = sum a_k cos(kx), k >= 0
    Cosine,
    /// 1-D odd: u = sum c_k sin(kx), k >= 1
    Sine,
    /// 2-D odd-odd: u = sum c_k sin(k1 x1) sin(k2 x2), k in N^2
    SineSine,
}

impl Symmetry {
    pub fn dim(&self) -> usize {
        match self {
            Symmetry::SineSine => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct IndexSet {
    pub n1: i32,
    pub n2: usize,
    pub sym: Symmetry,
}

impl IndexSet {
    pub fn new(n1: i32, n2: usize, sym: Symmetry) -> IndexSet {
        assert!(n1 >= 1 && n2 >= 1);
        IndexSet { n1, n2, sym }
    }

    pub fn m(&self) -> usize {
        self.sym.dim()
    }

    /// number of reduced Fourier indices
    pub fn num_k(&self) -> usize {
        let n1 = self.n1 as usize;
        match self.sym {
            Symmetry::None => 2 * n1 + 1,
            Symmetry::Cosine => n1 + 1,
            Symmetry::Sine => n1,
            Symmetry::SineSine => n1 * n1,
        }
    }

    pub fn len(&self) -> usize {
        self.num_k() * (self.n2 + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// reduced k for flat Fourier index i
    pub fn k_at(&self, i: usize) -> [i32; 2] {
        match self.sym {
            Symmetry::None => [i as i32 - self.n1, 0],
            Symmetry::Cosine => [i as i32, 0],
            Symmetry::Sine => [i as i32 + 1, 0],
            Symmetry::SineSine => {
                let n1 = self.n1 as usize;
                [(i / n1) as i32 + 1, (i % n1) as i32 + 1]
            }
        }
    }

    pub fn k_index(&self, k: [i32; 2]) -> Option<usize> {
        match self.sym {
            Symmetry::None => {
                if k[0].abs() <= self.n1 && k[1] == 0 {
                    Some((k[0] + self.n1) as usize)
                } else {
                    None
                }
            }
            Symmetry::Cosine => {
                if (0..=self.n1).contains(&k[0]) && k[1] == 0 {
                    Some(k[0] as usize)
                } else {
                    None
                }
            }
            Symmetry::Sine => {
                if (1..=self.n1).contains(&k[0]) && k[1] == 0 {
                    Some(k[0] as usize - 1)
                } else {
                    None
                }
            }
            Symmetry::SineSine => {
                if (1..=self.n1).contains(&k[0]) && (1..=self.n1).contains(&k[1]) {
                    Some((k[0] as usize - 1) * self.n1 as usize + (k[1] as usize - 1))
                } else {
                    None
                }
            }
        }
    }

    #[inline]
    pub fn flat(&self, ki: usize, n: usize) -> usize {
        ki * (self.n2 + 1) + n
    }
}

/// Region selector for the projection operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// |k|_inf <= N1 and n <= N2
    LeqN,
    GtN,
    LeqN1,
    GtN1,
    LeqN2,
    GtN2,
}

/// Symmetry-reduced Fourier-Chebyshev coefficient sequence.
#[derive(Debug, Clone)]
pub struct CoeffSeq {
    pub idx: IndexSet,
    pub vals: Vec<Interval>,
}

impl CoeffSeq {
    pub fn zeros(idx: IndexSet) -> CoeffSeq {
        CoeffSeq {
            vals: vec![Interval::ZERO; idx.len()],
            idx,
        }
    }

    pub fn get(&self, k: [i32; 2], n: usize) -> Interval {
        if n > self.idx.n2 {
            return Interval::ZERO;
        }
        match self.idx.k_index(k) {
            Some(ki) => self.vals[self.idx.flat(ki, n)],
            None => Interval::ZERO,
        }
    }

    pub fn set(&mut self, k: [i32; 2], n: usize, v: Interval) {
        let ki = self
            .idx
            .k_index(k)
            .unwrap_or_else(|| panic!("index {k:?} outside reduced domain"));
        let f = self.idx.flat(ki, n);
        self.vals[f] = v;
    }

    pub fn from_f64(idx: IndexSet, vals: &[f64]) -> CoeffSeq {
        assert_eq!(vals.len(), idx.len());
        CoeffSeq {
            idx,
            vals: vals.iter().map(|&x| Interval::point(x)).collect(),
        }
    }

    pub fn mids(&self) -> Vec<f64> {
        self.vals.iter().map(|v| v.mid()).collect()
    }

    /// Upper enclosure of the weighted norm sum |U_{k,n}| omega_{k,n} over
    /// the full (unreduced) lattice.
    pub fn norm_1w(&self, w: &WeightSpec) -> Interval {
        let mut acc = Interval::ZERO;
        match self.idx.sym {
            Symmetry::None => {
                for k in 0..=self.idx.n1 {
                    for n in 0..=self.idx.n2 {
                        let a = self.get([k, 0], n);
                        let mass = if k == 0 {
                            a.abs()
                        } else {
                            let b = self.get([-k, 0], n);
                            a.square().add(&b.square()).sqrt().unwrap()
                        };
                        if mass.hi() == 0.0 {
                            continue;
                        }
                        acc = acc.add(&mass.mul(&w.omega([k, 0], n)));
                    }
                }
            }
            _ => {
                for ki in 0..self.idx.num_k() {
                    let k = self.idx.k_at(ki);
                    let om0 = w.omega(k, 0);
                    let om1 = w.omega(k, 1);
                    for n in 0..=self.idx.n2 {
                        let v = self.vals[self.idx.flat(ki, n)];
                        if v.is_zero() {
                            continue;
                        }
                        let om = if n == 0 { om0 } else { om1 };
                        acc = acc.add(&v.abs().mul(&om));
                    }
                }
            }
        }
        acc
    }

    /// Projection: zero out the complement of the selected region.
    pub fn project(&self, which: Region) -> CoeffSeq {
        let mut out = self.clone();
        let n1 = self.idx.n1;
        let n2 = self.idx.n2;
        for ki in 0..self.idx.num_k() {
            let k = self.idx.k_at(ki);
            let kinf = k[0].abs().max(k[1].abs());
            for n in 0..=n2 {
                let keep = match which {
                    Region::LeqN => kinf <= n1 && n <= n2,
                    Region::GtN => !(kinf <= n1 && n <= n2),
                    Region::LeqN1 => kinf <= n1,
                    Region::GtN1 => kinf > n1,
                    Region::LeqN2 => n <= n2,
                    Region::GtN2 => n > n2,
                };
                if !keep {
                    out.vals[self.idx.flat(ki, n)] = Interval::ZERO;
                }
            }
        }
        out
    }

    /// Projection relative to a sub-box (n1, n2) of the ambient index set.
    pub fn project_box(&self, n1: i32, n2: usize, inside: bool) -> CoeffSeq {
        let mut out = self.clone();
        for ki in 0..self.idx.num_k() {
            let k = self.idx.k_at(ki);
            let kinf = k[0].abs().max(k[1].abs());
            for n in 0..=self.idx.n2 {
                let is_in = kinf <= n1 && n <= n2;
                if is_in != inside {
                    out.vals[self.idx.flat(ki, n)] = Interval::ZERO;
                }
            }
        }
        out
    }
}

/// W0 rescaling: forward maps (v0, v1, ...) to (v0, 2v1, 2v2, ...);
/// inverse halves entries n >= 1.
pub fn apply_w0(v: &[Interval], forward: bool) -> Vec<Interval> {
    v.iter()
        .enumerate()
        .map(|(n, x)| {
            if n == 0 {
                *x
            } else if forward {
                x.scale(2.0)
            } else {
                x.scale(0.5)
            }
        })
        .collect()
}

/// Full exponential-coefficient box with a power-of-i phase tag.
/// True coefficient at (k, n) is i^phase * vals[k, n]; entries outside the
/// box are zero.
#[derive(Debug, Clone)]
pub struct BoxSeq {
    pub m: usize,
    pub kmax: i32,
    pub nmax: usize,
    pub phase: u8,
    pub vals: Vec<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxDims {
    pub m: usize,
    pub kmax: i32,
    pub nmax: usize,
}

impl BoxDims {
    pub fn side(&self) -> usize {
        2 * self.kmax as usize + 1
    }

    pub fn num_k(&self) -> usize {
        match self.m {
            1 => self.side(),
            2 => self.side() * self.side(),
            _ => unreachable!(),
        }
    }

    pub fn len(&self) -> usize {
        self.num_k() * (self.nmax + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn k_flat(&self, k: [i32; 2]) -> usize {
        debug_assert!(k[0].abs() <= self.kmax && k[1].abs() <= self.kmax);
        match self.m {
            1 => (k[0] + self.kmax) as usize,
            _ => (k[0] + self.kmax) as usize * self.side() + (k[1] + self.kmax) as usize,
        }
    }

    #[inline]
    pub fn k_at(&self, i: usize) -> [i32; 2] {
        match self.m {
            1 => [i as i32 - self.kmax, 0],
            _ => {
                let s = self.side();
                [(i / s) as i32 - self.kmax, (i % s) as i32 - self.kmax]
            }
        }
    }

    #[inline]
    pub fn flat(&self, k: [i32; 2], n: usize) -> usize {
        self.k_flat(k) * (self.nmax + 1) + n
    }

    pub fn contains_k(&self, k: [i32; 2]) -> bool {
        k[0].abs() <= self.kmax && (self.m == 1 || k[1].abs() <= self.kmax) && (self.m == 2 || k[1] == 0)
    }
}

impl BoxSeq {
    pub fn zeros(m: usize, kmax: i32, nmax: usize, phase: u8) -> BoxSeq {
        let d = BoxDims { m, kmax, nmax };
        BoxSeq {
            m,
            kmax,
            nmax,
            phase: phase % 4,
            vals: vec![Interval::ZERO; d.len()],
        }
    }

    pub fn dims(&self) -> BoxDims {
        BoxDims {
            m: self.m,
            kmax: self.kmax,
            nmax: self.nmax,
        }
    }

    pub fn get(&self, k: [i32; 2], n: usize) -> Interval {
        if k[0].abs() > self.kmax || k[1].abs() > self.kmax || n > self.nmax {
            return Interval::ZERO;
        }
        self.vals[self.dims().flat(k, n)]
    }

    /// Reduce the phase to 0 or 1, negating values for phases 2 and 3.
    pub fn normalize_phase(&mut self) {
        if self.phase >= 2 {
            for v in self.vals.iter_mut() {
                *v = v.neg();
            }
            self.phase -= 2;
        }
    }

    /// Upper enclosure of the weighted l1 norm of the box (phase modulus 1).
    pub fn norm_1w(&self, w: &WeightSpec) -> Interval {
        let d = self.dims();
        let mut acc = Interval::ZERO;
        for ki in 0..d.num_k() {
            let k = d.k_at(ki);
            let om0 = w.omega(k, 0);
            let om1 = w.omega(k, 1);
            for n in 0..=d.nmax {
                let v = self.vals[ki * (d.nmax + 1) + n];
                if v.is_zero() {
                    continue;
                }
                acc = acc.add(&v.abs().mul(if n == 0 { &om0 } else { &om1 }));
            }
        }
        acc
    }

    /// f64 upper bounds on |entries|, for the bound engines.
    pub fn abs_upper(&self) -> Vec<f64> {
        self.vals.iter().map(|v| v.mag()).collect()
    }
}

/// Expand a reduced sequence to its exponential box.
pub fn expand(u: &CoeffSeq) -> BoxSeq {
    let n2 = u.idx.n2;
    match u.idx.sym {
        Symmetry::Cosine => {
            let mut b = BoxSeq::zeros(1, u.idx.n1, n2, 0);
            let d = b.dims();
            for k in 0..=u.idx.n1 {
                let half = if k == 0 { 1.0 } else { 0.5 };
                for n in 0..=n2 {
                    let v = u.get([k, 0], n).scale(half);
                    b.vals[d.flat([k, 0], n)] = v;
                    if k > 0 {
                        b.vals[d.flat([-k, 0], n)] = v;
                    }
                }
            }
            b
        }
        Symmetry::Sine => {
            // true U_k = i * (-sgn(k) c_{|k|} / 2)
            let mut b = BoxSeq::zeros(1, u.idx.n1, n2, 1);
            let d = b.dims();
            for k in 1..=u.idx.n1 {
                for n in 0..=n2 {
                    let v = u.get([k, 0], n).scale(0.5);
                    b.vals[d.flat([k, 0], n)] = v.neg();
                    b.vals[d.flat([-k, 0], n)] = v;
                }
            }
            b
        }
        Symmetry::SineSine => {
            // U_{(s1 k1, s2 k2)} = -s1 s2 c_k / 4
            let mut b = BoxSeq::zeros(2, u.idx.n1, n2, 0);
            let d = b.dims();
            for ki in 0..u.idx.num_k() {
                let k = u.idx.k_at(ki);
                for n in 0..=n2 {
                    let q = u.vals[u.idx.flat(ki, n)].scale(0.25);
                    if q.is_zero() {
                        continue;
                    }
                    for s1 in [-1, 1] {
                        for s2 in [-1, 1] {
                            let sgn = (s1 * s2) as f64;
                            b.vals[d.flat([s1 * k[0], s2 * k[1]], n)] = q.scale(-sgn);
                        }
                    }
                }
            }
            b
        }
        Symmetry::None => panic!("use expand_pair for unsymmetric sequences"),
    }
}

/// Expand an unsymmetric 1-D sequence into (real part box, imaginary part box).
pub fn expand_pair(u: &CoeffSeq) -> (BoxSeq, BoxSeq) {
    assert_eq!(u.idx.sym, Symmetry::None);
    let n2 = u.idx.n2;
    let mut re = BoxSeq::zeros(1, u.idx.n1, n2, 0);
    let mut im = BoxSeq::zeros(1, u.idx.n1, n2, 1);
    let d = re.dims();
    for k in 0..=u.idx.n1 {
        let half = if k == 0 { 1.0 } else { 0.5 };
        for n in 0..=n2 {
            let a = u.get([k, 0], n).scale(half);
            re.vals[d.flat([k, 0], n)] = a;
            if k > 0 {
                re.vals[d.flat([-k, 0], n)] = a;
                let b = u.get([-k, 0], n).scale(0.5);
                im.vals[d.flat([k, 0], n)] = b.neg();
                im.vals[d.flat([-k, 0], n)] = b;
            }
        }
    }
    (re, im)
}

/// Fold a box back into reduced storage for the given symmetry class.
/// The box phase must match the class parity; enclosures from equivalent
/// orbit points are intersected.
pub fn fold(b: &BoxSeq, sym: Symmetry) -> Result<CoeffSeq> {
    let mut bx = b.clone();
    bx.normalize_phase();
    let d = bx.dims();
    let idx = IndexSet::new(d.kmax.max(1), d.nmax.max(1), sym);
    let mut out = CoeffSeq::zeros(idx);
    let isect = |a: Interval, c: Interval| -> Result<Interval> {
        a.intersect(&c).ok_or(Error::SymmetryError)
    };
    match sym {
        Symmetry::Cosine => {
            if bx.phase != 0 {
                return Err(Error::SymmetryError);
            }
            for k in 0..=d.kmax {
                for n in 0..=d.nmax {
                    let v = if k == 0 {
                        bx.vals[d.flat([0, 0], n)]
                    } else {
                        let p = bx.vals[d.flat([k, 0], n)].scale(2.0);
                        let q = bx.vals[d.flat([-k, 0], n)].scale(2.0);
                        isect(p, q)?
                    };
                    out.set([k, 0], n, v);
                }
            }
        }
        Symmetry::Sine => {
            if bx.phase != 1 {
                return Err(Error::SymmetryError);
            }
            for n in 0..=d.nmax {
                let z = bx.vals[d.flat([0, 0], n)];
                if !z.contains(0.0) {
                    return Err(Error::SymmetryError);
                }
            }
            for k in 1..=d.kmax {
                for n in 0..=d.nmax {
                    let p = bx.vals[d.flat([k, 0], n)].scale(-2.0);
                    let q = bx.vals[d.flat([-k, 0], n)].scale(2.0);
                    out.set([k, 0], n, isect(p, q)?);
                }
            }
        }
        Symmetry::SineSine => {
            if bx.phase != 0 {
                return Err(Error::SymmetryError);
            }
            for k1 in 1..=d.kmax {
                for k2 in 1..=d.kmax {
                    for n in 0..=d.nmax {
                        let mut acc: Option<Interval> = None;
                        for s1 in [-1i32, 1] {
                            for s2 in [-1i32, 1] {
                                let sgn = -(s1 * s2) as f64;
                                let v = bx.vals[d.flat([s1 * k1, s2 * k2], n)].scale(sgn * 4.0);
                                acc = Some(match acc {
                                    None => v,
                                    Some(a) => isect(a, v)?,
                                });
                            }
                        }
                        out.set([k1, k2], n, acc.unwrap());
                    }
                }
            }
        }
        Symmetry::None => {
            return Err(Error::SymmetryError);
        }
    }
    Ok(out)
}

/// Fold a (real box, imaginary box) pair into an unsymmetric sequence.
pub fn fold_pair(re: &BoxSeq, im: &BoxSeq) -> Result<CoeffSeq> {
    let mut re = re.clone();
    let mut im = im.clone();
    re.normalize_phase();
    im.normalize_phase();
    if re.phase != 0 || im.phase != 1 {
        return Err(Error::SymmetryError);
    }
    let d = re.dims();
    let idx = IndexSet::new(d.kmax.max(1), d.nmax.max(1), Symmetry::None);
    let mut out = CoeffSeq::zeros(idx);
    for n in 0..=d.nmax {
        out.set([0, 0], n, re.vals[d.flat([0, 0], n)]);
    }
    for k in 1..=d.kmax {
        for n in 0..=d.nmax {
            let a = re.vals[d.flat([k, 0], n)]
                .scale(2.0)
                .intersect(&re.vals[d.flat([-k, 0], n)].scale(2.0))
                .ok_or(Error::SymmetryError)?;
            let b = im.vals[d.flat([k, 0], n)]
                .scale(-2.0)
                .intersect(&im.vals[d.flat([-k, 0], n)].scale(2.0))
                .ok_or(Error::SymmetryError)?;
            out.set([k, 0], n, a);
            out.set([-k, 0], n, b);
        }
    }
    Ok(out)
}

/// Discrete convolution of two boxes (Chebyshev indices reflected to Z and
/// folded back). Phases add.
pub fn conv_boxes(a: &BoxSeq, b: &BoxSeq) -> BoxSeq {
    assert_eq!(a.m, b.m);
    let mut out = BoxSeq::zeros(
        a.m,
        a.kmax + b.kmax,
        a.nmax + b.nmax,
        (a.phase + b.phase) % 4,
    );
    let da = a.dims();
    let db = b.dims();
    let dout = out.dims();
    let an = da.nmax + 1;
    let bn = db.nmax + 1;
    let on = dout.nmax + 1;
    for ka in 0..da.num_k() {
        let kav = da.k_at(ka);
        let arow = &a.vals[ka * an..(ka + 1) * an];
        if arow.iter().all(|v| v.is_zero()) {
            continue;
        }
        for kb in 0..db.num_k() {
            let kbv = db.k_at(kb);
            let brow = &b.vals[kb * bn..(kb + 1) * bn];
            let kout = [kav[0] + kbv[0], kav[1] + kbv[1]];
            let obase = dout.k_flat(kout) * on;
            for (na, av) in arow.iter().enumerate() {
                if av.is_zero() {
                    continue;
                }
                for (nb, bv) in brow.iter().enumerate() {
                    if bv.is_zero() {
                        continue;
                    }
                    let p = av.mul(bv);
                    let o = &mut out.vals[obase + na + nb];
                    *o = o.add(&p);
                    if na >= 1 && nb >= 1 {
                        if na == nb {
                            let o0 = &mut out.vals[obase];
                            *o0 = o0.add(&p.scale(2.0));
                        } else {
                            let od = &mut out.vals[obase + na.abs_diff(nb)];
                            *od = od.add(&p);
                        }
                    }
                }
            }
        }
    }
    out
}

/// f64 convolution of boxes given as raw value slices (solver fast path).
pub fn conv_boxes_f64(a: &[f64], da: BoxDims, b: &[f64], db: BoxDims) -> (Vec<f64>, BoxDims) {
    assert_eq!(da.m, db.m);
    let dout = BoxDims {
        m: da.m,
        kmax: da.kmax + db.kmax,
        nmax: da.nmax + db.nmax,
    };
    let mut out = vec![0.0; dout.len()];
    let an = da.nmax + 1;
    let bn = db.nmax + 1;
    let on = dout.nmax + 1;
    for ka in 0..da.num_k() {
        let kav = da.k_at(ka);
        let arow = &a[ka * an..(ka + 1) * an];
        if arow.iter().all(|&v| v == 0.0) {
            continue;
        }
        for kb in 0..db.num_k() {
            let kbv = db.k_at(kb);
            let brow = &b[kb * bn..(kb + 1) * bn];
            let kout = [kav[0] + kbv[0], kav[1] + kbv[1]];
            let obase = dout.k_flat(kout) * on;
            for (na, &av) in arow.iter().enumerate() {
                if av == 0.0 {
                    continue;
                }
                for (nb, &bv) in brow.iter().enumerate() {
                    let p = av * bv;
                    out[obase + na + nb] += p;
                    if na >= 1 && nb >= 1 {
                        if na == nb {
                            out[obase] += 2.0 * p;
                        } else {
                            out[obase + na.abs_diff(nb)] += p;
                        }
                    }
                }
            }
        }
    }
    (out, dout)
}

/// Double-double convolution of exact f64 boxes yielding tight interval
/// enclosures; used for residual-type quantities.
pub fn conv_boxes_dd(a: &[f64], da: BoxDims, b: &[f64], db: BoxDims) -> (Vec<Interval>, BoxDims) {
    assert_eq!(da.m, db.m);
    let dout = BoxDims {
        m: da.m,
        kmax: da.kmax + db.kmax,
        nmax: da.nmax + db.nmax,
    };
    let mut acc = vec![Dd::ZERO; dout.len()];
    let an = da.nmax + 1;
    let bn = db.nmax + 1;
    let on = dout.nmax + 1;
    for ka in 0..da.num_k() {
        let kav = da.k_at(ka);
        let arow = &a[ka * an..(ka + 1) * an];
        if arow.iter().all(|&v| v == 0.0) {
            continue;
        }
        for kb in 0..db.num_k() {
            let kbv = db.k_at(kb);
            let brow = &b[kb * bn..(kb + 1) * bn];
            let kout = [kav[0] + kbv[0], kav[1] + kbv[1]];
            let obase = dout.k_flat(kout) * on;
            for (na, &av) in arow.iter().enumerate() {
                if av == 0.0 {
                    continue;
                }
                for (nb, &bv) in brow.iter().enumerate() {
                    if bv == 0.0 {
                        continue;
                    }
                    acc[obase + na + nb].acc_prod(av, bv);
                    if na >= 1 && nb >= 1 {
                        if na == nb {
                            acc[obase].acc_prod(2.0 * av, bv);
                        } else {
                            acc[obase + na.abs_diff(nb)].acc_prod(av, bv);
                        }
                    }
                }
            }
        }
    }
    (acc.iter().map(|d| d.to_interval()).collect(), dout)
}

/// Convolution on reduced sequences. The result class follows the parity of
/// the product; unsupported class pairs are a SymmetryError.
pub fn convolve(u: &CoeffSeq, v: &CoeffSeq) -> Result<CoeffSeq> {
    use Symmetry::*;
    match (u.idx.sym, v.idx.sym) {
        (Cosine, Cosine) => fold(&conv_boxes(&expand(u), &expand(v)), Cosine),
        (Sine, Sine) => fold(&conv_boxes(&expand(u), &expand(v)), Cosine),
        (Cosine, Sine) | (Sine, Cosine) => fold(&conv_boxes(&expand(u), &expand(v)), Sine),
        (None, None) => {
            let (ar, ai) = expand_pair(u);
            let (br, bi) = expand_pair(v);
            let mut rr = conv_boxes(&ar, &br);
            let mut ii = conv_boxes(&ai, &bi);
            let mut ri = conv_boxes(&ar, &bi);
            let ir = conv_boxes(&ai, &br);
            rr.normalize_phase();
            ii.normalize_phase(); // i^2 = -1 handled by phase normalization
            for (x, y) in rr.vals.iter_mut().zip(&ii.vals) {
                *x = x.add(y);
            }
            ri.normalize_phase();
            for (x, y) in ri.vals.iter_mut().zip(&ir.vals) {
                *x = x.add(y);
            }
            fold_pair(&rr, &ri)
        }
        _ => Err(Error::SymmetryError),
    }
}

/// Convolution truncated to a target index set; the discarded tail is
/// returned as a rigorous weighted-norm remainder.
pub fn convolve_truncated(
    u: &CoeffSeq,
    v: &CoeffSeq,
    target: IndexSet,
    w: &WeightSpec,
) -> Result<(CoeffSeq, Interval)> {
    let full = convolve(u, v)?;
    if full.idx.sym != target.sym {
        return Err(Error::SymmetryError);
    }
    let mut kept = CoeffSeq::zeros(target);
    let mut rem = Interval::ZERO;
    for ki in 0..full.idx.num_k() {
        let k = full.idx.k_at(ki);
        let kinf = k[0].abs().max(k[1].abs());
        for n in 0..=full.idx.n2 {
            let val = full.vals[full.idx.flat(ki, n)];
            if val.is_zero() {
                continue;
            }
            if kinf <= target.n1 && n <= target.n2 {
                kept.set(k, n, val);
            } else {
                rem = rem.add(&val.abs().mul(&w.omega(k, n)));
            }
        }
    }
    Ok((kept, rem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weight_trivial_cases() {
        let w = WeightSpec::trivial();
        assert!(weight(&w, [5, 0], 0).contains(1.0));
        assert!(weight(&w, [5, 0], 3).contains(2.0));
        let w = WeightSpec::new(1.0, 2.0, 1.0).unwrap();
        assert!(weight(&w, [3, 0], 0).contains(16.0));
        assert!(weight(&w, [3, 0], 1).contains(32.0));
        assert!(weight(&w, [3, 0], 0).width() < 1e-12);
    }

    #[test]
    fn weight_submultiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = WeightSpec::new(0.7, 1.3, 1.05).unwrap();
        for _ in 0..200 {
            let k = [rng.gen_range(-20..20), rng.gen_range(-20..20)];
            let l = [rng.gen_range(-20..20), rng.gen_range(-20..20)];
            let n = rng.gen_range(0..5usize);
            let wkl = w.omega([k[0] + l[0], k[1] + l[1]], n);
            let wk = w.omega(k, n);
            let wl = w.omega(l, n);
            assert!(
                wkl.lo() <= wk.mul(&wl).hi() * (1.0 + 1e-12),
                "submultiplicativity violated"
            );
        }
    }

    #[test]
    fn norm_single_entries() {
        let idx = IndexSet::new(4, 6, Symmetry::Cosine);
        let w = WeightSpec::trivial();
        let mut u = CoeffSeq::zeros(idx);
        u.set([2, 0], 0, Interval::ONE);
        assert!(u.norm_1w(&w).contains(1.0));
        let mut u = CoeffSeq::zeros(idx);
        u.set([2, 0], 5, Interval::ONE);
        assert!(u.norm_1w(&w).contains(2.0));
    }

    #[test]
    fn norm_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let idx = IndexSet::new(5, 7, Symmetry::Sine);
        let w = WeightSpec::new(0.5, 1.0, 1.1).unwrap();
        let mut u = CoeffSeq::zeros(idx);
        for _ in 0..10 {
            let k = rng.gen_range(1..=5);
            let n = rng.gen_range(0..=7usize);
            let v: f64 = rng.gen_range(-2.0..2.0);
            u.set([k, 0], n, Interval::point(v));
        }
        let mut expect = 0.0;
        for k in 1..=5 {
            for n in 0..=7usize {
                let v = u.get([k, 0], n).mid();
                let om = (1.0 + 0.5 * k as f64) * 1.1f64.powi(k);
                let om = if n == 0 { om } else { 2.0 * om };
                expect += v.abs() * om;
            }
        }
        let got = u.norm_1w(&w);
        assert!(got.lo() <= expect * (1.0 + 1e-10) && expect * (1.0 - 1e-10) <= got.hi());
    }

    #[test]
    fn w0_roundtrip_and_values() {
        let v: Vec<Interval> = [1.0, 1.0, 1.0]
            .iter()
            .map(|&x| Interval::point(x))
            .collect();
        let f = apply_w0(&v, true);
        assert_eq!(f[0].mid(), 1.0);
        assert_eq!(f[1].mid(), 2.0);
        assert_eq!(f[2].mid(), 2.0);
        let back = apply_w0(&f, false);
        for (a, b) in back.iter().zip(&v) {
            assert!(a.contains(b.mid()));
        }
    }

    #[test]
    fn convolution_identity_element() {
        let idx = IndexSet::new(3, 4, Symmetry::Cosine);
        let mut e = CoeffSeq::zeros(IndexSet::new(1, 1, Symmetry::Cosine));
        e.set([0, 0], 0, Interval::ONE);
        let mut v = CoeffSeq::zeros(idx);
        v.set([1, 0], 2, Interval::point(0.7));
        v.set([3, 0], 0, Interval::point(-1.2));
        let c = convolve(&e, &v).unwrap();
        for k in 0..=3 {
            for n in 0..=4usize {
                let want = v.get([k, 0], n).mid();
                assert!(
                    c.get([k, 0], n).contains(want),
                    "identity conv mismatch at ({k},{n})"
                );
                assert!(c.get([k, 0], n).width() < 1e-14);
            }
        }
    }

    /// Exhaustive double-sum oracle on full exponential boxes.
    fn conv_oracle(a: &BoxSeq, b: &BoxSeq) -> BoxSeq {
        let mut out = BoxSeq::zeros(
            a.m,
            a.kmax + b.kmax,
            a.nmax + b.nmax,
            (a.phase + b.phase) % 4,
        );
        let dout = out.dims();
        let da = a.dims();
        let db = b.dims();
        for ko in 0..dout.num_k() {
            let k = dout.k_at(ko);
            for n in 0..=dout.nmax {
                let mut acc = Interval::ZERO;
                for kj in 0..db.num_k() {
                    let j = db.k_at(kj);
                    let kd = [k[0] - j[0], k[1] - j[1]];
                    if kd[0].abs() > da.kmax || kd[1].abs() > da.kmax {
                        continue;
                    }
                    let imax = db.nmax as i64;
                    for i in -imax..=imax {
                        let bi = b.get(j, i.unsigned_abs() as usize);
                        if bi.is_zero() {
                            continue;
                        }
                        let ai = (n as i64 - i).unsigned_abs() as usize;
                        let av = a.get(kd, ai);
                        if av.is_zero() {
                            continue;
                        }
                        acc = acc.add(&av.mul(&bi));
                    }
                }
                out.vals[dout.flat(k, n)] = acc;
            }
        }
        out
    }

    #[test]
    fn convolution_single_modes_vs_oracle() {
        let mut a = BoxSeq::zeros(1, 1, 1, 0);
        let d = a.dims();
        a.vals[d.flat([1, 0], 1)] = Interval::ONE;
        let c = conv_boxes(&a, &a);
        let o = conv_oracle(&a, &a);
        let dc = c.dims();
        assert!(c.vals[dc.flat([2, 0], 2)].contains(1.0));
        assert!(c.vals[dc.flat([2, 0], 0)].contains(2.0));
        for (x, y) in c.vals.iter().zip(&o.vals) {
            assert!(x.contains(y.mid()) || (x.is_zero() && y.is_zero()));
        }
    }

    #[test]
    fn convolution_sparse_vs_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for m in [1usize, 2] {
            for _case in 0..40 {
                let kmax = 2;
                let nmax = 3;
                let mut a = BoxSeq::zeros(m, kmax, nmax, 0);
                let mut b = BoxSeq::zeros(m, kmax, nmax, 0);
                let da = a.dims();
                for seq in [&mut a, &mut b] {
                    let cnt = rng.gen_range(1..=4usize);
                    for _ in 0..cnt {
                        let ki = rng.gen_range(0..da.num_k());
                        let n = rng.gen_range(0..=nmax);
                        let v: f64 = rng.gen_range(-2.0..2.0);
                        seq.vals[ki * (nmax + 1) + n] = Interval::point(v);
                    }
                }
                let c = conv_boxes(&a, &b);
                let o = conv_oracle(&a, &b);
                for (x, y) in c.vals.iter().zip(&o.vals) {
                    assert!(
                        x.intersects(y),
                        "conv differs from oracle: {x} vs {y} (m={m})"
                    );
                }
            }
        }
    }

    #[test]
    fn dd_and_f64_conv_agree_with_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let d = BoxDims {
            m: 1,
            kmax: 3,
            nmax: 4,
        };
        let vals: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = BoxSeq::zeros(1, 3, 4, 0);
        a.vals = vals.iter().map(|&x| Interval::point(x)).collect();
        let ci = conv_boxes(&a, &a);
        let (cf, df) = conv_boxes_f64(&vals, d, &vals, d);
        let (cd, _) = conv_boxes_dd(&vals, d, &vals, d);
        assert_eq!(df.len(), ci.vals.len());
        for i in 0..cf.len() {
            assert!(ci.vals[i].contains(cf[i]) || (ci.vals[i].hi() - cf[i]).abs() < 1e-12);
            assert!(cd[i].intersects(&ci.vals[i]));
        }
    }

    #[test]
    fn projections_partition_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let idx = IndexSet::new(4, 5, Symmetry::Cosine);
        let mut u = CoeffSeq::zeros(idx);
        for ki in 0..idx.num_k() {
            for n in 0..=idx.n2 {
                u.vals[idx.flat(ki, n)] = Interval::point(rng.gen_range(-1.0..1.0));
            }
        }
        let a = u.project(Region::LeqN);
        let b = u.project(Region::GtN);
        for i in 0..u.vals.len() {
            let s = a.vals[i].add(&b.vals[i]);
            assert!(s.contains(u.vals[i].mid()));
        }
        let aa = a.project(Region::LeqN1);
        for i in 0..u.vals.len() {
            assert_eq!(aa.vals[i], a.vals[i]);
        }
        // pi^{>N} = pi^{>N1} + pi^{<=N1} pi^{>N2} on a sub-box
        let sub = (2, 3usize);
        let lhs = u.project_box(sub.0, sub.1, false);
        let rhs1: Vec<Interval> = {
            let mut v = u.clone();
            for ki in 0..idx.num_k() {
                let k = idx.k_at(ki);
                for n in 0..=idx.n2 {
                    if k[0].abs() <= sub.0 {
                        v.vals[idx.flat(ki, n)] = Interval::ZERO;
                    }
                }
            }
            v.vals
        };
        let rhs2: Vec<Interval> = {
            let mut v = u.clone();
            for ki in 0..idx.num_k() {
                let k = idx.k_at(ki);
                for n in 0..=idx.n2 {
                    if k[0].abs() > sub.0 || n <= sub.1 {
                        v.vals[idx.flat(ki, n)] = Interval::ZERO;
                    }
                }
            }
            v.vals
        };
        for i in 0..u.vals.len() {
            let s = rhs1[i].add(&rhs2[i]);
            assert!(s.contains(lhs.vals[i].mid()));
        }
    }

    #[test]
    fn truncated_convolution_remainder() {
        let idx = IndexSet::new(2, 2, Symmetry::Cosine);
        let w = WeightSpec::trivial();
        let mut u = CoeffSeq::zeros(idx);
        u.set([2, 0], 2, Interval::ONE);
        let (kept, rem) = convolve_truncated(&u, &u, idx, &w).unwrap();
        let full = convolve(&u, &u).unwrap();
        let norm_full = full.norm_1w(&w);
        let norm_kept = kept.norm_1w(&w);
        let total = norm_kept.add(&rem);
        assert!(total.intersects(&norm_full));
        assert!(rem.lo() > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(250))]
        #[test]
        fn banach_algebra_submultiplicativity(seed in 0u64..5000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sym = match seed % 3 { 0 => Symmetry::Cosine, 1 => Symmetry::Sine, _ => Symmetry::None };
            let idx = IndexSet::new(3, 3, sym);
            let w = if seed % 2 == 0 {
                WeightSpec::trivial()
            } else {
                WeightSpec::new(0.3, 1.0, 1.02).unwrap()
            };
            let mut u = CoeffSeq::zeros(idx);
            let mut v = CoeffSeq::zeros(idx);
            for s in [&mut u, &mut v] {
                for x in s.vals.iter_mut() {
                    *x = Interval::point(rng.gen_range(-1.0..1.0));
                }
            }
            let c = convolve(&u, &v).unwrap();
            let lhs = c.norm_1w(&w);
            let rhs = u.norm_1w(&w).mul(&v.norm_1w(&w));
            prop_assert!(lhs.lo() <= rhs.hi() * (1.0 + 1e-10) + 1e-300,
                "submultiplicativity: {} > {}", lhs.lo(), rhs.hi());
        }
    }

    #[test]
    fn norm_w0_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let idx = IndexSet::new(3, 4, Symmetry::Cosine);
        let w = WeightSpec::new(0.2, 2.0, 1.1).unwrap();
        let mut u = CoeffSeq::zeros(idx);
        for x in u.vals.iter_mut() {
            *x = Interval::point(rng.gen_range(-1.0..1.0));
        }
        let direct = u.norm_1w(&w);
        let mut via_w0 = Interval::ZERO;
        for ki in 0..idx.num_k() {
            let k = idx.k_at(ki);
            let col: Vec<Interval> = (0..=idx.n2).map(|n| u.vals[idx.flat(ki, n)]).collect();
            let w0col = apply_w0(&col, true);
            let mut l1 = Interval::ZERO;
            for x in &w0col {
                l1 = l1.add(&x.abs());
            }
            via_w0 = via_w0.add(&l1.mul(&w.omega(k, 0)));
        }
        assert!(direct.intersects(&via_w0));
    }

    #[test]
    fn sine_expansion_roundtrip() {
        let idx = IndexSet::new(3, 2, Symmetry::Sine);
        let mut u = CoeffSeq::zeros(idx);
        u.set([1, 0], 0, Interval::point(0.5));
        u.set([3, 0], 2, Interval::point(-1.5));
        let b = expand(&u);
        let back = fold(&b, Symmetry::Sine).unwrap();
        assert!(back.get([1, 0], 0).contains(0.5));
        assert!(back.get([3, 0], 2).contains(-1.5));
        // odd * odd = even: the square folds into a cosine sequence
        let sq = convolve(&u, &u).unwrap();
        assert_eq!(sq.idx.sym, Symmetry::Cosine);
    }

    #[test]
    fn sinsin_expansion_roundtrip() {
        let idx = IndexSet::new(3, 2, Symmetry::SineSine);
        let mut u = CoeffSeq::zeros(idx);
        u.set([2, 1], 0, Interval::point(2.0));
        u.set([1, 3], 1, Interval::point(-0.8));
        let b = expand(&u);
        let back = fold(&b, Symmetry::SineSine).unwrap();
        assert!(back.get([2, 1], 0).contains(2.0));
        assert!(back.get([1, 3], 1).contains(-0.8));
        // the l1 norm of 2 sin(2x)sin(y) type data is the plain coefficient sum
        let w = WeightSpec::trivial();
        assert!(u.norm_1w(&w).contains(2.0 + 0.8 * 2.0));
    }
}
