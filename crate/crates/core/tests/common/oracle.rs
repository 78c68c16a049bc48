//! Brute-force corner search for 2×2 loops, written without the library's
//! linear algebra: kernels of 2×2 coefficients come from the row formula
//! `ker [[a, b], [c, d]] = span (-b, a)` and corners from the eigenvector
//! condition `|<v, A_n v>| = 1`.

use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use loopwave::laurent::{LaurentPoly, MatrixLaurent};
use loopwave::loopgroup::{random_paraunitary, Loop};

pub type M2 = [[C; 2]; 2];

const EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug)]
enum Ker {
    All,
    Line([C; 2]),
    Zero,
}

fn norm2(v: [C; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn inner(v: [C; 2], w: [C; 2]) -> C {
    v[0].conj() * w[0] + v[1].conj() * w[1]
}

fn apply(m: &M2, v: [C; 2]) -> [C; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn kernel(m: &M2) -> Ker {
    let scale = m.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    if scale <= EPS {
        return Ker::All;
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.norm() > EPS * scale * scale {
        return Ker::Zero;
    }
    let row = if norm2(m[0]) >= norm2(m[1]) { m[0] } else { m[1] };
    let v = [-row[1], row[0]];
    let n = norm2(v);
    Ker::Line([v[0] / n, v[1] / n])
}

fn meet(a: Ker, b: Ker) -> Ker {
    match (a, b) {
        (Ker::All, x) | (x, Ker::All) => x,
        (Ker::Zero, _) | (_, Ker::Zero) => Ker::Zero,
        (Ker::Line(v), Ker::Line(w)) => {
            if inner(v, w).norm() >= 1.0 - EPS {
                Ker::Line(v)
            } else {
                Ker::Zero
            }
        }
    }
}

fn coefficient(a: &MatrixLaurent, c: i64) -> M2 {
    let mut m = [[C::new(0.0, 0.0); 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a.get(i, j).coeff(c);
        }
    }
    m
}

/// Corner rank and sorted exponents of a 2×2 paraunitary loop.
pub fn corner(a: &MatrixLaurent) -> (usize, Vec<i64>) {
    let Some((lo, hi)) = a.support() else {
        return (0, Vec::new());
    };
    let coeffs: Vec<(i64, M2)> = (lo..=hi).map(|c| (c, coefficient(a, c))).collect();
    let mut lines = Vec::new();
    for e in lo.max(0)..=hi {
        let k = coeffs
            .iter()
            .filter(|(c, _)| *c != e)
            .fold(Ker::All, |acc, (_, m)| meet(acc, kernel(m)));
        match k {
            Ker::All => return (2, vec![e, e]),
            Ker::Line(v) => lines.push((e, v)),
            Ker::Zero => {}
        }
    }
    match lines.as_slice() {
        [] => (0, Vec::new()),
        [(e, v)] => {
            let w = apply(&coefficient(a, *e), *v);
            if inner(*v, w).norm() >= 1.0 - EPS {
                (1, vec![*e])
            } else {
                (0, Vec::new())
            }
        }
        many => {
            let mut exps: Vec<i64> = many.iter().map(|(e, _)| *e).collect();
            exps.sort();
            (2, exps)
        }
    }
}

fn cis(t: f64) -> C {
    C::from_polar(1.0, t)
}

/// A Haar-ish random element of U(2) from Euler angles.
pub fn unitary2(rng: &mut ChaCha8Rng) -> M2 {
    let tau = std::f64::consts::TAU;
    let theta: f64 = rng.random::<f64>() * tau / 4.0;
    let (a, b, g) = (
        rng.random::<f64>() * tau,
        rng.random::<f64>() * tau,
        rng.random::<f64>() * tau,
    );
    let (c, s) = (theta.cos(), theta.sin());
    let p = cis(a);
    [[p * cis(b) * c, p * cis(g) * s], [-p * cis(-g) * s, p * cis(-b) * c]]
}

pub fn constant(m: &M2) -> MatrixLaurent {
    MatrixLaurent::from_fn(2, |i, j| LaurentPoly::constant(m[i][j]))
}

fn adjoint(m: &M2) -> M2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

fn diag(a: i64, b: i64) -> MatrixLaurent {
    MatrixLaurent::diag_monomials(&[a, b])
}

/// The seeded test family: monomial diagonals conjugated or not,
/// constants, elementary products and library-generated random loops,
/// all of degree at most 2 before an overall shift.
pub fn family_loop(seed: u64) -> Loop {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = unitary2(&mut rng);
    let w = unitary2(&mut rng);
    let a = rng.random_range(-1..=2i64);
    let b = a + rng.random_range(-2..=2i64);
    let mat = match seed % 6 {
        0 => constant(&v).mul(&diag(a, b)).unwrap().mul(&constant(&w)).unwrap(),
        1 => constant(&adjoint(&w))
            .mul(&diag(a, b))
            .unwrap()
            .mul(&constant(&w))
            .unwrap(),
        2 => constant(&v),
        3 => random_paraunitary(2, 1 + (seed as usize / 6) % 2, seed)
            .unwrap()
            .into_mat(),
        4 => {
            let shift = rng.random_range(-1..=0i64);
            random_paraunitary(2, 2, seed)
                .unwrap()
                .into_mat()
                .mul(&diag(shift, shift))
                .unwrap()
        }
        _ => constant(&adjoint(&w))
            .mul(&diag(a, a + 1))
            .unwrap()
            .mul(&constant(&w))
            .unwrap()
            .mul(&diag(0, rng.random_range(-1..=1i64)))
            .unwrap(),
    };
    Loop::certify(mat, 1e-10).expect("family members are paraunitary")
}
