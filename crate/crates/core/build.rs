//! Generates the Cayley tables of 3D conformal geometric algebra.
//!
//! Products are first evaluated in the diagonal basis {e1, e2, e3, e+, e-}
//! (e+² = 1, e-² = -1), where blade products are monomial, and then changed
//! to the null basis {e1, e2, e3, e0, e∞} with e0 = (e- - e+)/2 and
//! e∞ = e- + e+. Blades are outer products of basis vectors, ordered by grade
//! and lexicographically within a grade.

use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

const DIM: usize = 5;
const BLADES: usize = 1 << DIM;
const DIAGONAL_METRIC: [f64; DIM] = [1.0, 1.0, 1.0, 1.0, -1.0];

/// Motor blades in storage order: 1, e12, e13, e23, e1∞, e2∞, e3∞, e123∞.
const MOTOR_MASKS: [usize; 8] = [0b00000, 0b00011, 0b00101, 0b00110, 0b10001, 0b10010, 0b10100, 0b10111];

fn reorder_sign(a: usize, b: usize) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn blade_order() -> Vec<usize> {
    let mut masks: Vec<usize> = (0..BLADES).collect();
    masks.sort_by_key(|&m| {
        let indices: Vec<usize> = (0..DIM).filter(|i| m & (1 << i) != 0).collect();
        (m.count_ones(), indices)
    });
    masks
}

type Dense = [f64; BLADES];

fn diagonal_product(a: &Dense, b: &Dense) -> Dense {
    let mut out = [0.0; BLADES];
    for (ma, &ca) in a.iter().enumerate() {
        if ca == 0.0 {
            continue;
        }
        for (mb, &cb) in b.iter().enumerate() {
            if cb == 0.0 {
                continue;
            }
            let mut sign = reorder_sign(ma, mb);
            let common = ma & mb;
            for (i, metric) in DIAGONAL_METRIC.iter().enumerate() {
                if common & (1 << i) != 0 {
                    sign *= metric;
                }
            }
            out[ma ^ mb] += sign * ca * cb;
        }
    }
    out
}

fn outer(a: &Dense, b: &Dense) -> Dense {
    let mut out = [0.0; BLADES];
    for (ma, &ca) in a.iter().enumerate() {
        for (mb, &cb) in b.iter().enumerate() {
            if ma & mb == 0 && ca != 0.0 && cb != 0.0 {
                out[ma | mb] += reorder_sign(ma, mb) * ca * cb;
            }
        }
    }
    out
}

/// Expands the outer-product blade of `vectors[i]` (selected by `mask`) in
/// the coordinates the vectors are written in.
fn expand_blade(mask: usize, vectors: &[Dense; DIM]) -> Dense {
    let mut acc = [0.0; BLADES];
    acc[0] = 1.0;
    for (i, v) in vectors.iter().enumerate() {
        if mask & (1 << i) != 0 {
            acc = outer(&acc, v);
        }
    }
    acc
}

fn vector(coeffs: [f64; DIM]) -> Dense {
    let mut v = [0.0; BLADES];
    for (i, c) in coeffs.iter().enumerate() {
        v[1 << i] = *c;
    }
    v
}

fn main() {
    println!("cargo:rerun-if-changed=build.rs");

    // Null basis vectors written in the diagonal basis (e1, e2, e3, e+, e-).
    let null_in_diag = [
        vector([1.0, 0.0, 0.0, 0.0, 0.0]),
        vector([0.0, 1.0, 0.0, 0.0, 0.0]),
        vector([0.0, 0.0, 1.0, 0.0, 0.0]),
        vector([0.0, 0.0, 0.0, -0.5, 0.5]),
        vector([0.0, 0.0, 0.0, 1.0, 1.0]),
    ];
    // Diagonal basis vectors written in the null basis (e1, e2, e3, e0, e∞).
    let diag_in_null = [
        vector([1.0, 0.0, 0.0, 0.0, 0.0]),
        vector([0.0, 1.0, 0.0, 0.0, 0.0]),
        vector([0.0, 0.0, 1.0, 0.0, 0.0]),
        vector([0.0, 0.0, 0.0, -1.0, 0.5]),
        vector([0.0, 0.0, 0.0, 1.0, 0.5]),
    ];
    let to_diag: Vec<Dense> = (0..BLADES).map(|m| expand_blade(m, &null_in_diag)).collect();
    let to_null: Vec<Dense> = (0..BLADES).map(|m| expand_blade(m, &diag_in_null)).collect();

    let order = blade_order();
    let mut position = [0usize; BLADES];
    for (idx, &m) in order.iter().enumerate() {
        position[m] = idx;
    }

    // terms[i] holds (j, k, coeff) for the product of stored blades i and j.
    let mut terms: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); BLADES];
    for (i, &ma) in order.iter().enumerate() {
        for (j, &mb) in order.iter().enumerate() {
            let prod = diagonal_product(&to_diag[ma], &to_diag[mb]);
            let mut null = [0.0; BLADES];
            for (md, &c) in prod.iter().enumerate() {
                if c != 0.0 {
                    for (mn, &t) in to_null[md].iter().enumerate() {
                        null[mn] += c * t;
                    }
                }
            }
            for (mn, &c) in null.iter().enumerate() {
                if c.abs() > 1e-12 {
                    terms[i].push((j, position[mn], c));
                }
            }
        }
    }

    let grade = |idx: usize| order[idx].count_ones() as usize;
    let mut out = String::new();
    writeln!(out, "// @generated by build.rs; do not edit.").unwrap();
    writeln!(out, "pub(crate) const BLADE_MASKS: [u8; 32] = {:?};", order).unwrap();
    let grades: Vec<usize> = (0..BLADES).map(grade).collect();
    writeln!(out, "pub(crate) const BLADE_GRADES: [u8; 32] = {:?};", grades).unwrap();

    let emit = |out: &mut String, name: &str, keep: &dyn Fn(usize, usize, usize) -> bool| {
        let mut starts = vec![0usize];
        let mut flat = Vec::new();
        for (i, row) in terms.iter().enumerate() {
            for &(j, k, c) in row {
                if keep(i, j, k) {
                    flat.push((j, k, c));
                }
            }
            starts.push(flat.len());
        }
        writeln!(out, "pub(crate) const {name}_STARTS: [u16; 33] = {:?};", starts).unwrap();
        writeln!(out, "pub(crate) const {name}_TERMS: [(u8, u8, f64); {}] = [", flat.len()).unwrap();
        for (j, k, c) in flat {
            writeln!(out, "    ({j}, {k}, {c:?}),").unwrap();
        }
        writeln!(out, "];").unwrap();
    };
    emit(&mut out, "GEOMETRIC", &|_, _, _| true);
    emit(&mut out, "OUTER", &|i, j, k| grade(k) == grade(i) + grade(j));
    emit(&mut out, "INNER", &|i, j, k| grade(k) == grade(i).abs_diff(grade(j)));

    // Motor subalgebra product in local motor indices.
    let motor_idx: Vec<usize> = MOTOR_MASKS.iter().map(|&m| position[m]).collect();
    writeln!(out, "pub(crate) const MOTOR_BLADES: [u8; 8] = {:?};", motor_idx).unwrap();
    let mut motor_terms = Vec::new();
    for (a, &i) in motor_idx.iter().enumerate() {
        for &(j, k, c) in &terms[i] {
            if let Some(b) = motor_idx.iter().position(|&x| x == j) {
                let d = motor_idx
                    .iter()
                    .position(|&x| x == k)
                    .expect("motor subalgebra is closed under the geometric product");
                motor_terms.push((a, b, d, c));
            }
        }
    }
    writeln!(out, "pub(crate) const MOTOR_TERMS: [(u8, u8, u8, f64); {}] = [", motor_terms.len()).unwrap();
    for (a, b, d, c) in motor_terms {
        writeln!(out, "    ({a}, {b}, {d}, {c:?}),").unwrap();
    }
    writeln!(out, "];").unwrap();

    let path = PathBuf::from(env::var("OUT_DIR").unwrap()).join("cga_tables.rs");
    fs::write(path, out).unwrap();
}
