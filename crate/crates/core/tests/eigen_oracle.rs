use fracconv::frames::{convolve_family, gram_matrix, symmetric_eigenvalues, trig_basis, GramMatrix, Side};
use fracconv::{FineGrid, Partition, RbOperator, ScaleVector};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn reference(m: &GramMatrix) -> Vec<f64> {
    let n = m.size();
    let dm = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let mut values: Vec<f64> = dm.symmetric_eigen().eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

fn assert_close(got: &[f64], want: &[f64], scale: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= 1e-10 * scale.max(1.0), "{got:?} vs {want:?}");
    }
}

proptest! {
    #[test]
    fn jacobi_matches_nalgebra(n in 1usize..9, entries in prop::collection::vec(-5.0f64..5.0, 64)) {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| entries[i.min(j) * 8 + i.max(j)]).collect())
            .collect();
        let m = GramMatrix::from_rows(&rows).unwrap();
        assert_close(&symmetric_eigenvalues(&m).unwrap(), &reference(&m), m.frobenius());
    }
}

#[test]
fn convolved_gram_spectrum_matches_nalgebra() {
    let grid = FineGrid::new(Partition::uniform(0.0, 1.0, 4).unwrap(), 256).unwrap();
    let fam = trig_basis(12, &grid).unwrap();
    for (side, alpha) in [(Side::LeftNull, 0.3), (Side::RightNull, -0.2), (Side::Difference, 0.45)] {
        let op = RbOperator::new(grid.clone(), ScaleVector::constant(alpha, &grid).unwrap()).unwrap();
        let gram = gram_matrix(&convolve_family(&fam, side, &op, None).unwrap()).unwrap();
        assert_close(&symmetric_eigenvalues(&gram).unwrap(), &reference(&gram), gram.frobenius());
    }
}
