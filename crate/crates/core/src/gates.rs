//! Gate matrices and the gather/scatter kernels that apply a k-qubit
//! operator to statevectors and density matrices.
//!
//! Local index convention: for an operator on `qubits = [a, b, ...]`,
//! qubit `a` is bit 0 of the operator's local index, `b` is bit 1, and so
//! on. Global indices use qubit 0 as the least significant bit.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use crate::circuit::{Gate, GateKind};

pub type C64 = Complex64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major 2^k x 2^k matrix for the gate, in the local index convention.
pub fn gate_matrix(g: &Gate) -> Vec<C64> {
    let i = ZERO;
    match g.kind {
        GateKind::H => vec![
            c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0),
            c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0),
        ],
        GateKind::X => vec![i, ONE, ONE, i],
        GateKind::Y => vec![i, c(0.0, -1.0), c(0.0, 1.0), i],
        GateKind::Z => vec![ONE, i, i, c(-1.0, 0.0)],
        GateKind::S => vec![ONE, i, i, c(0.0, 1.0)],
        GateKind::SDG => vec![ONE, i, i, c(0.0, -1.0)],
        GateKind::T => vec![ONE, i, i, C64::from_polar(1.0, FRAC_PI_4)],
        GateKind::RX => {
            let h = g.params[0] / 2.0;
            vec![
                c(h.cos(), 0.0), c(0.0, -h.sin()),
                c(0.0, -h.sin()), c(h.cos(), 0.0),
            ]
        }
        GateKind::RY => {
            let h = g.params[0] / 2.0;
            vec![
                c(h.cos(), 0.0), c(-h.sin(), 0.0),
                c(h.sin(), 0.0), c(h.cos(), 0.0),
            ]
        }
        GateKind::RZ => {
            let h = g.params[0] / 2.0;
            vec![
                C64::from_polar(1.0, -h), i,
                i, C64::from_polar(1.0, h),
            ]
        }
        // control is local bit 0, target local bit 1
        GateKind::CX => permutation(&[0, 3, 2, 1]),
        GateKind::CZ => diagonal(&[ONE, ONE, ONE, c(-1.0, 0.0)]),
        GateKind::CP => diagonal(&[ONE, ONE, ONE, C64::from_polar(1.0, g.params[0])]),
        GateKind::SWAP => permutation(&[0, 2, 1, 3]),
        // controls are local bits 0 and 1, target local bit 2
        GateKind::CCX => permutation(&[0, 1, 2, 7, 4, 5, 6, 3]),
    }
}

fn permutation(image: &[usize]) -> Vec<C64> {
    let d = image.len();
    let mut m = vec![ZERO; d * d];
    for (src, &dst) in image.iter().enumerate() {
        m[dst * d + src] = ONE;
    }
    m
}

fn diagonal(entries: &[C64]) -> Vec<C64> {
    let d = entries.len();
    let mut m = vec![ZERO; d * d];
    for (j, &e) in entries.iter().enumerate() {
        m[j * d + j] = e;
    }
    m
}

/// Expands the local indices of `qubits` against a base global index.
fn sub_indices(base: usize, qubits: &[usize]) -> Vec<usize> {
    let dim = 1 << qubits.len();
    (0..dim)
        .map(|local| {
            let mut idx = base;
            for (j, &q) in qubits.iter().enumerate() {
                if local >> j & 1 == 1 {
                    idx |= 1 << q;
                }
            }
            idx
        })
        .collect()
}

/// Applies a k-qubit operator to a statevector in place.
pub fn apply_to_state(mat: &[C64], qubits: &[usize], psi: &mut [C64]) {
    let k = qubits.len();
    let dim = 1 << k;
    debug_assert_eq!(mat.len(), dim * dim);
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let mut amp = vec![ZERO; dim];
    for base in 0..psi.len() {
        if base & mask != 0 {
            continue;
        }
        let idx = sub_indices(base, qubits);
        for (l, &ix) in idx.iter().enumerate() {
            amp[l] = psi[ix];
        }
        for (r, &ix) in idx.iter().enumerate() {
            let mut acc = ZERO;
            for (m, &a) in amp.iter().enumerate() {
                acc += mat[r * dim + m] * a;
            }
            psi[ix] = acc;
        }
    }
}

/// rho <- (A x I) rho: applies the operator to the row index.
pub fn apply_left(mat: &[C64], qubits: &[usize], rho: &mut [C64], d: usize) {
    let k = qubits.len();
    let dim = 1 << k;
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let mut amp = vec![ZERO; dim];
    for base in 0..d {
        if base & mask != 0 {
            continue;
        }
        let idx = sub_indices(base, qubits);
        for col in 0..d {
            for (l, &ix) in idx.iter().enumerate() {
                amp[l] = rho[ix * d + col];
            }
            for (r, &ix) in idx.iter().enumerate() {
                let mut acc = ZERO;
                for (m, &a) in amp.iter().enumerate() {
                    acc += mat[r * dim + m] * a;
                }
                rho[ix * d + col] = acc;
            }
        }
    }
}

/// rho <- rho (A x I)^dagger: applies the conjugated operator to the
/// column index.
pub fn apply_right_dagger(mat: &[C64], qubits: &[usize], rho: &mut [C64], d: usize) {
    let k = qubits.len();
    let dim = 1 << k;
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let mut amp = vec![ZERO; dim];
    for base in 0..d {
        if base & mask != 0 {
            continue;
        }
        let idx = sub_indices(base, qubits);
        for row in 0..d {
            for (l, &ix) in idx.iter().enumerate() {
                amp[l] = rho[row * d + ix];
            }
            for (cix, &ix) in idx.iter().enumerate() {
                let mut acc = ZERO;
                for (m, &a) in amp.iter().enumerate() {
                    acc += mat[cix * dim + m].conj() * a;
                }
                rho[row * d + ix] = acc;
            }
        }
    }
}

/// rho <- A rho A^dagger for a single operator A on the given qubits.
pub fn conjugate(mat: &[C64], qubits: &[usize], rho: &mut [C64], d: usize) {
    apply_left(mat, qubits, rho, d);
    apply_right_dagger(mat, qubits, rho, d);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hadamard_on_zero() {
        let mut psi = vec![ONE, ZERO];
        apply_to_state(&gate_matrix(&Gate::one(GateKind::H, 0)), &[0], &mut psi);
        assert_abs_diff_eq!(psi[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(psi[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn cx_flips_target_when_control_set() {
        // |q1 q0> = |01> (control q0 set), CX q0->q1 gives |11>
        let mut psi = vec![ZERO; 4];
        psi[0b01] = ONE;
        apply_to_state(&gate_matrix(&Gate::two(GateKind::CX, 0, 1)), &[0, 1], &mut psi);
        assert_abs_diff_eq!(psi[0b11].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ccx_flips_only_with_both_controls() {
        let mut psi = vec![ZERO; 8];
        psi[0b011] = ONE; // q0=q1=1, q2=0
        let g = Gate::new(GateKind::CCX, vec![0, 1, 2], vec![]);
        apply_to_state(&gate_matrix(&g), &[0, 1, 2], &mut psi);
        assert_abs_diff_eq!(psi[0b111].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gate_matrices_are_unitary() {
        let gates = vec![
            Gate::one(GateKind::H, 0),
            Gate::one(GateKind::X, 0),
            Gate::one(GateKind::Y, 0),
            Gate::one(GateKind::Z, 0),
            Gate::one(GateKind::S, 0),
            Gate::one(GateKind::SDG, 0),
            Gate::one(GateKind::T, 0),
            Gate::rot(GateKind::RX, 0, 0.7),
            Gate::rot(GateKind::RY, 0, 1.3),
            Gate::rot(GateKind::RZ, 0, -2.1),
            Gate::two(GateKind::CX, 0, 1),
            Gate::two(GateKind::CZ, 0, 1),
            Gate::new(GateKind::CP, vec![0, 1], vec![0.4]),
            Gate::two(GateKind::SWAP, 0, 1),
            Gate::new(GateKind::CCX, vec![0, 1, 2], vec![]),
        ];
        for g in gates {
            let m = gate_matrix(&g);
            let dim = 1 << g.kind.arity();
            for r in 0..dim {
                for cix in 0..dim {
                    let mut acc = ZERO;
                    for k in 0..dim {
                        acc += m[k * dim + r].conj() * m[k * dim + cix];
                    }
                    let expect = if r == cix { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(acc.re, expect, epsilon = 1e-14);
                    assert_abs_diff_eq!(acc.im, 0.0, epsilon = 1e-14);
                }
            }
        }
    }
}
