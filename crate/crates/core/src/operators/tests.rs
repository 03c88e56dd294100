use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::scalar::dot;

fn random_image(rng: &mut ChaCha8Rng, p: usize, q: usize) -> Image<f64> {
    Image::from_fn(p, q, |_, _| rng.random_range(-1.0..1.0)).unwrap()
}

fn gaussian(hw: usize, s: f64) -> GaussianPsf<f64> {
    GaussianPsf::new(hw, s).unwrap()
}

fn all_variants(psf: &GaussianPsf<f64>, p: usize, q: usize) -> Vec<BlurOperator<f64>> {
    use BoundaryCondition::*;
    use OperatorKind::*;
    [
        (Zero, SeparableToeplitz),
        (Zero, Dense),
        (Periodic, SeparableCirculant),
        (Periodic, Bccb),
        (Periodic, Dense),
        (Reflexive, Padded),
        (Reflexive, Dense),
    ]
    .into_iter()
    .map(|(bc, kind)| build_operator(psf, bc, p, q, kind).unwrap())
    .collect()
}

#[test]
fn delta_psf_is_identity_everywhere() {
    let psf = gaussian(0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_image(&mut rng, 6, 5);
    for op in all_variants(&psf, 6, 5) {
        let y = op.apply(&x, false).unwrap();
        assert!((y.matrix() - x.matrix()).norm() < 1e-14, "{}", op.kind());
    }
}

#[test]
fn incompatible_variants_rejected() {
    let psf = gaussian(1, 1.0);
    use BoundaryCondition::*;
    use OperatorKind::*;
    for (bc, kind) in [
        (Zero, Bccb),
        (Zero, SeparableCirculant),
        (Periodic, SeparableToeplitz),
        (Reflexive, SeparableToeplitz),
        (Zero, Padded),
    ] {
        assert!(matches!(
            build_operator(&psf, bc, 8, 8, kind),
            Err(DeblurError::IncompatibleVariant { .. })
        ));
    }
}

#[test]
fn separable_apply_matches_dense_kronecker() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let row = ToeplitzMatrix::new((0..15).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let col = ToeplitzMatrix::new((0..15).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let op = BlurOperator::separable_toeplitz(row.clone(), col.clone());
    let x = random_image(&mut rng, 8, 8);
    let dense = kron(&row.to_dense(), &col.to_dense());
    let expected = &dense * x.vec();
    let got = op.apply(&x, false).unwrap().vec();
    assert!((got - &expected).norm() < 1e-12 * expected.norm());
    assert_eq!(op.assemble_dense().unwrap(), dense);
}

#[test]
fn two_by_two_kronecker_layout() {
    let (a, b, c) = (0.5, 0.25, 0.125);
    // a 2×2 Toeplitz [[a, b], [c, a]] via t = (b, a, c)
    let t = ToeplitzMatrix::new(vec![b, a, c]).unwrap();
    let op = BlurOperator::separable_toeplitz(t.clone(), t);
    let m = op.assemble_dense().unwrap();
    let f = [[a, b], [c, a]];
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(m[(i, j)], f[i / 2][j / 2] * f[i % 2][j % 2]);
        }
    }
}

#[test]
fn single_pixel_spreads_to_kernel() {
    let psf = gaussian(3, 1.2);
    let p = 16;
    let mut x = Image::zeros(p, p);
    let mut m = x.clone().into_matrix();
    m[(8, 7)] = 1.0;
    x = Image::new(m).unwrap();
    for op in all_variants(&psf, p, p) {
        let y = op.apply(&x, false).unwrap();
        for i in 0..p {
            for j in 0..p {
                let di = i as isize - 8;
                let dj = j as isize - 7;
                let expected = if di.abs() <= 3 && dj.abs() <= 3 {
                    psf.kernel2d()[((di + 3) as usize, (dj + 3) as usize)]
                } else {
                    0.0
                };
                assert!((y.get(i, j) - expected).abs() < 1e-14, "{}", op.kind());
            }
        }
    }
}

#[test]
fn zero_and_periodic_differ_only_near_border() {
    let hw = 3;
    let psf = gaussian(hw, 1.5);
    let p = 16;
    let zero = build_operator(&psf, BoundaryCondition::Zero, p, p, OperatorKind::Dense)
        .unwrap()
        .assemble_dense()
        .unwrap();
    let per = build_operator(&psf, BoundaryCondition::Periodic, p, p, OperatorKind::Dense)
        .unwrap()
        .assemble_dense()
        .unwrap();
    for col in 0..p * p {
        let (ci, cj) = (col % p, col / p);
        let interior = ci >= hw && ci < p - hw && cj >= hw && cj < p - hw;
        let diff = (zero.column(col) - per.column(col)).norm();
        if interior {
            assert!(diff < 1e-15);
        } else {
            assert!(diff > 1e-6);
            for row in 0..p * p {
                let (ri, rj) = (row % p, row / p);
                let near = ri < hw || ri >= p - hw || rj < hw || rj >= p - hw;
                if !near {
                    assert!((zero[(row, col)] - per[(row, col)]).abs() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn constant_psf_has_dc_eigenvalue() {
    let (p, q) = (4, 6);
    let kernel = DMatrix::from_element(p, q, 1.0 / (p * q) as f64);
    let op = BlurOperator::bccb_from_kernel(&kernel, (2, 3), p, q).unwrap();
    let Representation::Bccb { eig, .. } = op.representation() else {
        panic!()
    };
    assert!((eig[(0, 0)].re - 1.0).abs() < 1e-15 && eig[(0, 0)].im.abs() < 1e-15);
    assert!(eig.iter().skip(1).all(|c| c.norm() < 1e-15));
}

#[test]
fn structured_layouts() {
    let psf = gaussian(2, 1.0);
    let p = 5;
    let bccb = build_operator(&psf, BoundaryCondition::Periodic, p, p, OperatorKind::Bccb)
        .unwrap()
        .assemble_dense()
        .unwrap();
    let m = p * p;
    // every column of a BCCB matrix is a 2-D circular shift of the first
    for c in 0..m {
        let (k, l) = (c % p, c / p);
        for r in 0..m {
            let (i, j) = (r % p, r / p);
            let src = (i + p - k) % p + p * ((j + p - l) % p);
            assert_eq!(bccb[(r, c)], bccb[(src, 0)]);
        }
    }
    let bttb = build_operator(&psf, BoundaryCondition::Zero, p, p, OperatorKind::SeparableToeplitz)
        .unwrap()
        .assemble_dense()
        .unwrap();
    let block = |bi: usize, bj: usize| bttb.view((bi * p, bj * p), (p, p)).into_owned();
    for bi in 1..p {
        for bj in 1..p {
            assert_eq!(block(bi, bj), block(bi - 1, bj - 1));
        }
    }
    for bi in 0..p {
        let b = block(bi, 0);
        for i in 1..p {
            for j in 1..p {
                assert_eq!(b[(i, j)], b[(i - 1, j - 1)]);
            }
        }
    }
}

#[test]
fn adjoint_identity_all_variants() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (p, q) in [(8, 8), (16, 16), (9, 12), (16, 10)] {
        let psf = gaussian(rng.random_range(1..=4), rng.random_range(0.6..2.5));
        for op in all_variants(&psf, p, q) {
            let x = random_image(&mut rng, p, q);
            let y = random_image(&mut rng, p, q);
            let ax = op.apply(&x, false).unwrap();
            let aty = op.apply(&y, true).unwrap();
            let lhs = dot(ax.as_slice(), y.as_slice());
            let rhs = dot(x.as_slice(), aty.as_slice());
            assert!((lhs - rhs).abs() < 1e-10, "{} {lhs} {rhs}", op.kind());
        }
    }
}

#[test]
fn representations_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for p in [8, 16] {
        let psf = gaussian(rng.random_range(1..=3), rng.random_range(0.5..2.0));
        let x = random_image(&mut rng, p, p);
        for bc in [
            BoundaryCondition::Zero,
            BoundaryCondition::Periodic,
            BoundaryCondition::Reflexive,
        ] {
            let dense = build_operator(&psf, bc, p, p, OperatorKind::Dense).unwrap();
            let reference = dense.apply(&x, false).unwrap();
            let reference_t = dense.apply(&x, true).unwrap();
            let kinds: &[OperatorKind] = match bc {
                BoundaryCondition::Zero => &[OperatorKind::SeparableToeplitz],
                BoundaryCondition::Periodic => &[OperatorKind::SeparableCirculant, OperatorKind::Bccb],
                BoundaryCondition::Reflexive => &[OperatorKind::Padded],
            };
            for kind in kinds {
                let op = build_operator(&psf, bc, p, p, *kind).unwrap();
                let y = op.apply(&x, false).unwrap();
                let yt = op.apply(&x, true).unwrap();
                assert!((y.matrix() - reference.matrix()).amax() < 1e-10);
                assert!((yt.matrix() - reference_t.matrix()).amax() < 1e-10);
            }
        }
    }
}

#[test]
fn bccb_is_diagonalized_by_dft() {
    // symmetric PSF: BCCB matrix is symmetric, so eigenvalues are real and
    // can be compared as sorted multisets
    let psf = gaussian(2, 1.1);
    let p = 8;
    let op = build_operator(&psf, BoundaryCondition::Periodic, p, p, OperatorKind::Bccb).unwrap();
    let Representation::Bccb { eig, .. } = op.representation() else {
        panic!()
    };
    let dense = op.assemble_dense().unwrap();
    let mut ev: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
    let mut fe: Vec<f64> = eig.iter().map(|c| c.re).collect();
    assert!(eig.iter().all(|c| c.im.abs() < 1e-12));
    ev.sort_by(f64::total_cmp);
    fe.sort_by(f64::total_cmp);
    for (a, b) in ev.iter().zip(&fe) {
        assert!((a - b).abs() < 1e-8);
    }

    // asymmetric kernel: each 2-D Fourier mode is an eigenvector
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let kernel = DMatrix::from_fn(3, 3, |_, _| rng.random_range(0.0..1.0));
    let (p, q) = (6, 4);
    let op = BlurOperator::bccb_from_kernel(&kernel, (1, 1), p, q).unwrap();
    let Representation::Bccb { eig, .. } = op.representation() else {
        panic!()
    };
    let a = op.assemble_dense().unwrap();
    for k in 0..p {
        for l in 0..q {
            let mode = |i: usize, j: usize| {
                let ang = 2.0 * std::f64::consts::PI * ((k * i) as f64 / p as f64 + (l * j) as f64 / q as f64);
                num_complex::Complex::from_polar(1.0, ang)
            };
            let f: Vec<_> = (0..p * q).map(|r| mode(r % p, r / p)).collect();
            let re = DVector::from_iterator(p * q, f.iter().map(|c| c.re));
            let im = DVector::from_iterator(p * q, f.iter().map(|c| c.im));
            let (ar, ai) = (&a * &re, &a * &im);
            let lambda = eig[(k, l)];
            for r in 0..p * q {
                let expect = lambda * f[r];
                assert!((ar[r] - expect.re).abs() < 1e-10 && (ai[r] - expect.im).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn periodic_blur_conserves_intensity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let psf = gaussian(3, 1.4);
    let x = random_image(&mut rng, 12, 9).map(|v| v + 1.0).unwrap();
    for kind in [
        OperatorKind::SeparableCirculant,
        OperatorKind::Bccb,
        OperatorKind::Dense,
    ] {
        let op = build_operator(&psf, BoundaryCondition::Periodic, 12, 9, kind).unwrap();
        let y = op.apply(&x, false).unwrap();
        assert!((y.sum() - x.sum()).abs() < 1e-10);
    }
}

#[test]
fn reflexive_matches_explicit_padding() {
    let psf = gaussian(2, 1.0);
    let (p, q) = (7, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_image(&mut rng, p, q);
    let op = build_operator(&psf, BoundaryCondition::Reflexive, p, q, OperatorKind::Padded).unwrap();
    let y = op.apply(&x, false).unwrap();
    let h = 2usize;
    let mirror = |i: isize, n: usize| -> usize {
        if i < 0 {
            (-i - 1) as usize
        } else if i as usize >= n {
            2 * n - 1 - i as usize
        } else {
            i as usize
        }
    };
    let k = psf.kernel2d();
    for i in 0..p {
        for j in 0..q {
            let mut acc = 0.0;
            for a in 0..=2 * h {
                for b in 0..=2 * h {
                    let si = mirror(i as isize - (a as isize - h as isize), p);
                    let sj = mirror(j as isize - (b as isize - h as isize), q);
                    acc += k[(a, b)] * x.get(si, sj);
                }
            }
            assert!((y.get(i, j) - acc).abs() < 1e-14);
        }
    }
    // mirrored extension keeps a constant image constant
    let ones = Image::from_fn(p, q, |_, _| 1.0).unwrap();
    let yo = op.apply(&ones, false).unwrap();
    assert!(yo.as_slice().iter().all(|v| (v - 1.0).abs() < 1e-14));
}

#[test]
fn dense_guard() {
    let psf = gaussian(1, 1.0);
    let op = build_operator(&psf, BoundaryCondition::Zero, 65, 64, OperatorKind::SeparableToeplitz).unwrap();
    assert!(matches!(op.assemble_dense(), Err(DeblurError::TooLarge(4160, 4096))));
}

#[test]
fn dimension_mismatch() {
    let psf = gaussian(1, 1.0);
    let op = build_operator(&psf, BoundaryCondition::Zero, 8, 8, OperatorKind::SeparableToeplitz).unwrap();
    assert!(matches!(
        op.apply(&Image::zeros(8, 7), false),
        Err(DeblurError::DimensionMismatch { .. })
    ));
}

#[test]
fn circulant_symbol_matches_bccb() {
    let psf = gaussian(2, 1.3);
    let sep = build_operator(
        &psf,
        BoundaryCondition::Periodic,
        8,
        6,
        OperatorKind::SeparableCirculant,
    )
    .unwrap();
    let bccb = build_operator(&psf, BoundaryCondition::Periodic, 8, 6, OperatorKind::Bccb).unwrap();
    let a = sep.circulant_symbol().unwrap();
    let b = bccb.circulant_symbol().unwrap();
    assert!((a - &b).norm() < 1e-13);
    let c = sep.to_bccb().unwrap().circulant_symbol().unwrap();
    assert!((c - b).norm() < 1e-13);
}
