//! Dense statevector engine.
//!
//! Qubits are created lazily: a freshly prepared qubit is stored as a lone
//! two-amplitude product factor and only joins the dense register when an
//! entangling gate needs it. A CZ against a qubit that is exactly in a
//! computational-basis state (a dummy) is applied as a conditional Z on the
//! partner, so dummies never enter the register. Other CZs are queued and
//! applied just before either endpoint is next touched.

mod density;

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use density::DensityMatrix;

use crate::pattern::Angle;
use crate::scalar::Scalar;

/// Caller-chosen qubit label.
pub type Qubit = u32;

pub const DEFAULT_CAPACITY: usize = 22;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QsimError {
    #[error("register would need {needed} qubits, capacity is {capacity}")]
    CapacityExceeded { needed: usize, capacity: usize },
    #[error("qubit {0} does not exist")]
    UnknownQubit(Qubit),
    #[error("qubit {0} already exists")]
    DuplicateQubit(Qubit),
    #[error("state must have 2^n non-zero-norm amplitudes for {0} qubits")]
    BadAmplitudes(usize),
    #[error("density matrix over {0} qubits requested, limit is {MAX_DENSITY_QUBITS}")]
    SubsetTooLarge(usize),
}

/// Largest subset [`QuantumState::reduced_density`] will build a matrix for.
pub const MAX_DENSITY_QUBITS: usize = 6;

/// One-time pad `Z(phase) X^x Z^z`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliPad {
    pub x: u8,
    pub z: u8,
    #[serde(default)]
    pub phase: Angle,
}

impl PauliPad {
    pub fn pauli(x: u8, z: u8) -> PauliPad {
        PauliPad { x: x & 1, z: z & 1, phase: Angle::ZERO }
    }

    /// Product of two phase-free pads, up to global phase.
    pub fn compose(self, other: PauliPad) -> PauliPad {
        debug_assert!(self.phase == Angle::ZERO && other.phase == Angle::ZERO);
        PauliPad::pauli(self.x ^ other.x, self.z ^ other.z)
    }
}

#[derive(Clone, Debug)]
enum Slot {
    Single,
    Register(usize),
}

#[derive(Clone, Debug)]
pub struct QuantumState<T: Scalar> {
    capacity: usize,
    high_water: usize,
    singles: BTreeMap<Qubit, [Complex<T>; 2]>,
    /// Register qubits; position `k` is bit `n - 1 - k` of the amplitude index.
    reg: Vec<Qubit>,
    amps: Vec<Complex<T>>,
    pending: BTreeSet<(Qubit, Qubit)>,
    retired: BTreeMap<Qubit, u8>,
}

impl<T: Scalar> Default for QuantumState<T> {
    fn default() -> Self {
        Self::with_capacity(DEFAULT_CAPACITY)
    }
}

fn c<T: Scalar>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

impl<T: Scalar> QuantumState<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// `capacity` bounds the dense register width.
    pub fn with_capacity(capacity: usize) -> Self {
        QuantumState {
            capacity,
            high_water: 0,
            singles: BTreeMap::new(),
            reg: Vec::new(),
            amps: vec![c(T::one(), T::zero())],
            pending: BTreeSet::new(),
            retired: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Widest the dense register has been.
    pub fn high_water_mark(&self) -> usize {
        self.high_water
    }

    pub fn register_width(&self) -> usize {
        self.reg.len()
    }

    pub fn contains(&self, q: Qubit) -> bool {
        self.singles.contains_key(&q) || self.reg.contains(&q)
    }

    pub fn live_qubits(&self) -> BTreeSet<Qubit> {
        self.singles.keys().copied().chain(self.reg.iter().copied()).collect()
    }

    fn slot(&self, q: Qubit) -> Result<Slot, QsimError> {
        if self.singles.contains_key(&q) {
            Ok(Slot::Single)
        } else {
            self.reg.iter().position(|r| *r == q).map(Slot::Register).ok_or(QsimError::UnknownQubit(q))
        }
    }

    fn fresh(&self, q: Qubit) -> Result<(), QsimError> {
        if self.contains(q) {
            Err(QsimError::DuplicateQubit(q))
        } else {
            Ok(())
        }
    }

    /// Prepares `a|0> + b|1>` (normalised here).
    pub fn prepare(&mut self, q: Qubit, a: Complex<T>, b: Complex<T>) -> Result<(), QsimError> {
        self.fresh(q)?;
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm <= T::zero() {
            return Err(QsimError::BadAmplitudes(1));
        }
        self.singles.insert(q, [a / norm, b / norm]);
        Ok(())
    }

    /// |+_θ> = (|0> + e^{iθ}|1>)/√2.
    pub fn prepare_plus_theta(&mut self, q: Qubit, theta: Angle) -> Result<(), QsimError> {
        self.prepare(q, c(T::one(), T::zero()), Complex::from_polar(T::one(), theta.radians()))
    }

    /// |d>.
    pub fn prepare_dummy(&mut self, q: Qubit, d: u8) -> Result<(), QsimError> {
        let (zero, one) = (c(T::zero(), T::zero()), c(T::one(), T::zero()));
        if d & 1 == 0 {
            self.prepare(q, one, zero)
        } else {
            self.prepare(q, zero, one)
        }
    }

    /// Adds a joint state on fresh qubits; `qubits[0]` is the most significant bit.
    pub fn prepare_register(&mut self, qubits: &[Qubit], amps: &[Complex<T>]) -> Result<(), QsimError> {
        if amps.len() != 1 << qubits.len() {
            return Err(QsimError::BadAmplitudes(qubits.len()));
        }
        let mut seen = BTreeSet::new();
        for &q in qubits {
            self.fresh(q)?;
            if !seen.insert(q) {
                return Err(QsimError::DuplicateQubit(q));
            }
        }
        let norm = amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr()).sqrt();
        if norm <= T::zero() {
            return Err(QsimError::BadAmplitudes(qubits.len()));
        }
        self.ensure_room(qubits.len())?;
        let old = std::mem::take(&mut self.amps);
        let mut amps_out = Vec::with_capacity(old.len() * amps.len());
        for o in &old {
            for a in amps {
                amps_out.push(*o * (*a / norm));
            }
        }
        self.amps = amps_out;
        self.reg.extend_from_slice(qubits);
        self.high_water = self.high_water.max(self.reg.len());
        Ok(())
    }

    fn ensure_room(&self, extra: usize) -> Result<(), QsimError> {
        let needed = self.reg.len() + extra;
        if needed > self.capacity {
            Err(QsimError::CapacityExceeded { needed, capacity: self.capacity })
        } else {
            Ok(())
        }
    }

    /// Moves a lone qubit into the register.
    fn merge(&mut self, q: Qubit) -> Result<usize, QsimError> {
        match self.slot(q)? {
            Slot::Register(k) => Ok(k),
            Slot::Single => {
                self.ensure_room(1)?;
                let [a, b] = self.singles.remove(&q).expect("single exists");
                let old = std::mem::take(&mut self.amps);
                let mut out = Vec::with_capacity(old.len() * 2);
                for o in old {
                    out.push(o * a);
                    out.push(o * b);
                }
                self.amps = out;
                self.reg.push(q);
                self.high_water = self.high_water.max(self.reg.len());
                Ok(self.reg.len() - 1)
            }
        }
    }

    fn mask(&self, k: usize) -> usize {
        1 << (self.reg.len() - 1 - k)
    }

    /// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` without flushing.
    fn apply_raw(&mut self, q: Qubit, m: [Complex<T>; 4]) -> Result<(), QsimError> {
        match self.slot(q)? {
            Slot::Single => {
                let s = self.singles.get_mut(&q).expect("single exists");
                let [a, b] = *s;
                *s = [m[0] * a + m[1] * b, m[2] * a + m[3] * b];
            }
            Slot::Register(k) => {
                let mask = self.mask(k);
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | mask]);
                        self.amps[i] = m[0] * a + m[1] * b;
                        self.amps[i | mask] = m[2] * a + m[3] * b;
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies an arbitrary single-qubit gate. Diagonal gates commute with
    /// CZ, so queued entanglers stay queued.
    pub fn apply_1q(&mut self, q: Qubit, m: [Complex<T>; 4]) -> Result<(), QsimError> {
        if m[1] != Complex::new(T::zero(), T::zero()) || m[2] != Complex::new(T::zero(), T::zero()) {
            self.flush(q)?;
        }
        self.apply_raw(q, m)
    }

    pub fn x(&mut self, q: Qubit) -> Result<(), QsimError> {
        let (o, l) = (c(T::zero(), T::zero()), c(T::one(), T::zero()));
        self.apply_1q(q, [o, l, l, o])
    }

    pub fn z(&mut self, q: Qubit) -> Result<(), QsimError> {
        let (o, l) = (c(T::zero(), T::zero()), c(T::one(), T::zero()));
        self.apply_1q(q, [l, o, o, -l])
    }

    pub fn y(&mut self, q: Qubit) -> Result<(), QsimError> {
        let (o, i) = (c(T::zero(), T::zero()), c(T::zero(), T::one()));
        self.apply_1q(q, [o, -i, i, o])
    }

    pub fn h(&mut self, q: Qubit) -> Result<(), QsimError> {
        let s = c(T::FRAC_1_SQRT_2(), T::zero());
        self.apply_1q(q, [s, s, s, -s])
    }

    /// diag(1, e^{iα}).
    pub fn z_rotation(&mut self, q: Qubit, alpha: T) -> Result<(), QsimError> {
        let (o, l) = (c(T::zero(), T::zero()), c(T::one(), T::zero()));
        self.apply_1q(q, [l, o, o, Complex::from_polar(T::one(), alpha)])
    }

    /// Applies `Z(phase) X^x Z^z`.
    pub fn apply_pad(&mut self, q: Qubit, pad: PauliPad) -> Result<(), QsimError> {
        if pad.z & 1 == 1 {
            self.z(q)?;
        }
        if pad.x & 1 == 1 {
            self.x(q)?;
        }
        if pad.phase != Angle::ZERO {
            self.z_rotation(q, pad.phase.radians())?;
        }
        Ok(())
    }

    /// Inverse of [`apply_pad`](Self::apply_pad), up to global phase.
    pub fn undo_pad(&mut self, q: Qubit, pad: PauliPad) -> Result<(), QsimError> {
        if pad.phase != Angle::ZERO {
            self.z_rotation(q, (-pad.phase).radians())?;
        }
        if pad.x & 1 == 1 {
            self.x(q)?;
        }
        if pad.z & 1 == 1 {
            self.z(q)?;
        }
        Ok(())
    }

    /// Outcomes of measured qubits.
    pub fn retired(&self) -> &BTreeMap<Qubit, u8> {
        &self.retired
    }

    /// Squared norm of the whole state.
    pub fn norm_sqr(&self) -> T {
        let reg = self.amps.iter().fold(T::zero(), |s, a| s + a.norm_sqr());
        self.singles.values().fold(reg, |acc, [a, b]| acc * (a.norm_sqr() + b.norm_sqr()))
    }

    /// Exact computational-basis value of a lone qubit, if it has one.
    fn basis_value(&self, q: Qubit) -> Option<u8> {
        let [a, b] = self.singles.get(&q)?;
        let eps = T::zero_threshold();
        if b.norm_sqr() <= eps {
            Some(0)
        } else if a.norm_sqr() <= eps {
            Some(1)
        } else {
            None
        }
    }

    /// Queues CZ(a, b); a basis-state endpoint turns it into a conditional Z now.
    pub fn cz(&mut self, a: Qubit, b: Qubit) -> Result<(), QsimError> {
        self.slot(a)?;
        self.slot(b)?;
        if a == b {
            return Ok(());
        }
        if let Some(d) = self.basis_value(a) {
            if d == 1 {
                self.z(b)?;
            }
            return Ok(());
        }
        if let Some(d) = self.basis_value(b) {
            if d == 1 {
                self.z(a)?;
            }
            return Ok(());
        }
        let key = (a.min(b), a.max(b));
        // CZ² = 1
        if !self.pending.remove(&key) {
            self.pending.insert(key);
        }
        Ok(())
    }

    /// Applies every queued CZ that touches `q`.
    fn flush(&mut self, q: Qubit) -> Result<(), QsimError> {
        let edges: Vec<(Qubit, Qubit)> = self.pending.iter().filter(|(a, b)| *a == q || *b == q).copied().collect();
        for e in edges {
            self.pending.remove(&e);
            self.apply_cz_now(e.0, e.1)?;
        }
        Ok(())
    }

    fn flush_all(&mut self) -> Result<(), QsimError> {
        let edges: Vec<(Qubit, Qubit)> = std::mem::take(&mut self.pending).into_iter().collect();
        for (a, b) in edges {
            self.apply_cz_now(a, b)?;
        }
        Ok(())
    }

    fn apply_cz_now(&mut self, a: Qubit, b: Qubit) -> Result<(), QsimError> {
        // an endpoint may have become a basis state since the CZ was queued
        for (p, o) in [(a, b), (b, a)] {
            if let Some(d) = self.basis_value(p) {
                if d == 1 {
                    self.apply_raw(
                        o,
                        [c(T::one(), T::zero()), c(T::zero(), T::zero()), c(T::zero(), T::zero()), c(-T::one(), T::zero())],
                    )?;
                }
                return Ok(());
            }
        }
        let ka = self.merge(a)?;
        let kb = self.merge(b)?;
        let (ma, mb) = (self.mask(ka), self.mask(kb));
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & ma != 0 && i & mb != 0 {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Measures `q` in the basis {|+_δ>, |-_δ>} and removes it; returns 0 for |+_δ>.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: Qubit, delta: T, rng: &mut R) -> Result<u8, QsimError> {
        // <±_δ| = <±| Z(-δ)
        self.z_rotation(q, -delta)?;
        self.h(q)?;
        self.measure_z(q, rng)
    }

    pub fn measure_angle<R: Rng + ?Sized>(&mut self, q: Qubit, delta: Angle, rng: &mut R) -> Result<u8, QsimError> {
        self.measure(q, delta.radians(), rng)
    }

    /// Computational-basis measurement; removes `q`.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: Qubit, rng: &mut R) -> Result<u8, QsimError> {
        let m = self.collapse(q, rng)?;
        self.retired.insert(q, m);
        Ok(m)
    }

    fn collapse<R: Rng + ?Sized>(&mut self, q: Qubit, rng: &mut R) -> Result<u8, QsimError> {
        self.flush(q)?;
        match self.slot(q)? {
            Slot::Single => {
                let [a, b] = self.singles.remove(&q).expect("single exists");
                let p0 = a.norm_sqr() / (a.norm_sqr() + b.norm_sqr());
                Ok(u8::from(rng.gen::<f64>() >= p0.as_f64()))
            }
            Slot::Register(k) => {
                let mask = self.mask(k);
                let p1: T = self.amps.iter().enumerate().filter(|(i, _)| i & mask != 0).fold(T::zero(), |s, (_, a)| s + a.norm_sqr());
                let total: T = self.amps.iter().fold(T::zero(), |s, a| s + a.norm_sqr());
                let p0 = (total - p1) / total;
                let m = u8::from(rng.gen::<f64>() >= p0.as_f64());
                let p = if m == 1 { p1 / total } else { p0 };
                let norm = p.sqrt() * total.sqrt();
                let want = if m == 1 { mask } else { 0 };
                let low = mask - 1;
                let out: Vec<Complex<T>> = (0..self.amps.len() / 2)
                    .map(|j| {
                        let i = ((j & !low) << 1) | want | (j & low);
                        self.amps[i] / norm
                    })
                    .collect();
                self.amps = out;
                self.reg.remove(k);
                Ok(m)
            }
        }
    }

    /// Renames a qubit.
    pub fn relabel(&mut self, from: Qubit, to: Qubit) -> Result<(), QsimError> {
        if from == to {
            return self.slot(from).map(|_| ());
        }
        self.fresh(to)?;
        match self.slot(from)? {
            Slot::Single => {
                let s = self.singles.remove(&from).expect("single exists");
                self.singles.insert(to, s);
            }
            Slot::Register(k) => self.reg[k] = to,
        }
        let pending = std::mem::take(&mut self.pending);
        self.pending = pending
            .into_iter()
            .map(|(a, b)| {
                let (a, b) = (if a == from { to } else { a }, if b == from { to } else { b });
                (a.min(b), a.max(b))
            })
            .collect();
        Ok(())
    }

    /// Reduced density matrix of `qubits`, in that order.
    pub fn reduced_density(&self, qubits: &[Qubit]) -> Result<DensityMatrix<T>, QsimError> {
        if qubits.len() > MAX_DENSITY_QUBITS {
            return Err(QsimError::SubsetTooLarge(qubits.len()));
        }
        let mut work = self.clone();
        work.capacity = usize::MAX;
        work.flush_all()?;
        for &q in qubits {
            work.merge(q)?;
        }
        let full = DensityMatrix::from_pure(&work.amps);
        let keep: Vec<usize> = qubits.iter().map(|q| work.reg.iter().position(|r| r == q).expect("merged")).collect();
        Ok(full.partial_trace(&keep))
    }

    /// Pure state of `qubits` when they hold all register amplitudes; `None`
    /// if they are entangled with anything else.
    pub fn amplitudes(&self, qubits: &[Qubit]) -> Result<Option<Vec<Complex<T>>>, QsimError> {
        let mut work = self.clone();
        work.capacity = usize::MAX;
        work.flush_all()?;
        for &q in qubits {
            work.merge(q)?;
        }
        if work.reg.len() != qubits.len() {
            return Ok(None);
        }
        let n = qubits.len();
        let pos: Vec<usize> = qubits.iter().map(|q| work.reg.iter().position(|r| r == q).expect("merged")).collect();
        let mut out = vec![c(T::zero(), T::zero()); 1 << n];
        for (i, a) in work.amps.iter().enumerate() {
            let mut j = 0;
            for (p, &k) in pos.iter().enumerate() {
                j |= ((i >> (n - 1 - k)) & 1) << (n - 1 - p);
            }
            out[j] = *a;
        }
        Ok(Some(out))
    }
}
