use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::{Complex, Complex64};

use crate::scalar::Scalar;

/// A density matrix on `n` qubits, row-major; qubit 0 is the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn from_raw(n: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), 1 << (2 * n), "density matrix size does not match {n} qubits");
        DensityMatrix { n, data }
    }

    pub fn from_pure(psi: &[Complex<T>]) -> Self {
        let dim = psi.len();
        assert!(dim.is_power_of_two(), "state length must be a power of two");
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        DensityMatrix { n: dim.trailing_zeros() as usize, data }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex::new(T::one() / T::of(dim as f64), T::zero());
        }
        DensityMatrix { n, data }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.dim() + j]
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim()).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.get(i, i))
    }

    pub fn to_f64(&self) -> DensityMatrix<f64> {
        DensityMatrix { n: self.n, data: self.data.iter().map(|c| Complex64::new(c.re.as_f64(), c.im.as_f64())).collect() }
    }

    fn to_matrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| {
            let c = self.get(i, j);
            Complex64::new(c.re.as_f64(), c.im.as_f64())
        })
    }

    /// ½‖ρ − σ‖₁, from the eigenvalues of the Hermitian difference.
    pub fn trace_distance(&self, other: &DensityMatrix<T>) -> f64 {
        assert_eq!(self.n, other.n, "trace distance between different sizes");
        let diff = self.to_matrix() - other.to_matrix();
        let diff = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(diff).eigenvalues.iter().map(|l| l.abs()).sum::<f64>() / 2.0
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity_pure(&self, psi: &[Complex64]) -> f64 {
        let d = self.dim();
        assert_eq!(psi.len(), d, "fidelity against a state of the wrong size");
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                let r = self.get(i, j);
                acc += psi[i].conj() * Complex64::new(r.re.as_f64(), r.im.as_f64()) * psi[j];
            }
        }
        acc.re
    }

    /// Keeps the listed qubits, in that order.
    pub fn partial_trace(&self, keep: &[usize]) -> DensityMatrix<T> {
        let n = self.n;
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let dk = 1 << k;
        let compose = |a: usize, e: usize| {
            let mut idx = 0;
            for (p, &q) in keep.iter().enumerate() {
                idx |= ((a >> (k - 1 - p)) & 1) << (n - 1 - q);
            }
            for (p, &q) in rest.iter().enumerate() {
                idx |= ((e >> (rest.len() - 1 - p)) & 1) << (n - 1 - q);
            }
            idx
        };
        let mut data = vec![Complex::new(T::zero(), T::zero()); dk * dk];
        for a in 0..dk {
            for b in 0..dk {
                let mut acc = Complex::new(T::zero(), T::zero());
                for e in 0..(1usize << rest.len()) {
                    acc = acc + self.get(compose(a, e), compose(b, e));
                }
                data[a * dk + b] = acc;
            }
        }
        DensityMatrix { n: k, data }
    }

    /// ρ ⊗ σ.
    pub fn kron(&self, other: &DensityMatrix<T>) -> DensityMatrix<T> {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut data = vec![Complex::new(T::zero(), T::zero()); d * d];
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                for k in 0..db {
                    for l in 0..db {
                        data[(i * db + k) * d + (j * db + l)] = a * other.get(k, l);
                    }
                }
            }
        }
        DensityMatrix { n: self.n + other.n, data }
    }
}

impl DensityMatrix<f64> {
    /// U ρ U† for a dense row-major `u`.
    pub fn conjugate_by(&self, u: &[Complex64]) -> DensityMatrix<f64> {
        let d = self.dim();
        assert_eq!(u.len(), d * d, "unitary of the wrong size");
        let m = DMatrix::from_row_slice(d, d, u);
        let out = &m * self.to_matrix() * m.adjoint();
        let data = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| out[(i, j)]).collect();
        DensityMatrix { n: self.n, data }
    }
}
