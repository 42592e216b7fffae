use nalgebra::{DMatrix, SymmetricEigen};

use super::{DistanceMatrix, VisError};

/// Classical multidimensional scaling into two dimensions.
///
/// Squared distances are double-centered, the two largest eigenpairs kept,
/// and negative eigenvalues (non-Euclidean input) clamped to zero. Each axis
/// is oriented so its largest-magnitude coordinate is positive, and the
/// result is centered at the origin.
pub fn project_2d(distances: &DistanceMatrix) -> Result<Vec<(f64, f64)>, VisError> {
    let k = distances.size();
    if k < 2 {
        return Err(VisError::TooFewTopics(k));
    }
    distances.validate()?;

    let d2 = DMatrix::from_fn(k, k, |i, j| distances.get(i, j).powi(2));
    let centering = DMatrix::<f64>::identity(k, k) - DMatrix::from_element(k, k, 1.0 / k as f64);
    let b = -0.5 * &centering * d2 * &centering;
    let b = 0.5 * (&b + b.transpose());

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut axes = [vec![0.0; k], vec![0.0; k]];
    for (axis, &idx) in axes.iter_mut().zip(order.iter()) {
        let lambda = eig.eigenvalues[idx].max(0.0);
        let scale = lambda.sqrt();
        let v = eig.eigenvectors.column(idx);
        let pivot = (0..k)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..k {
            axis[i] = sign * v[i] * scale;
        }
        let mean = axis.iter().sum::<f64>() / k as f64;
        axis.iter_mut().for_each(|x| *x -= mean);
    }
    Ok((0..k).map(|i| (axes[0][i], axes[1][i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
        ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
    }

    #[test]
    fn two_points() {
        let d = 0.8;
        let pts = project_2d(&DistanceMatrix::from_rows(&[vec![0.0, d], vec![d, 0.0]])).unwrap();
        assert!((pts[0].0.abs() - d / 2.0).abs() < 1e-12);
        assert!((pts[0].0 + pts[1].0).abs() < 1e-12);
        assert!(pts.iter().all(|p| p.1.abs() < 1e-12));
    }

    #[test]
    fn equilateral_triangle() {
        let s = 0.5;
        let m = DistanceMatrix::from_rows(&[vec![0.0, s, s], vec![s, 0.0, s], vec![s, s, 0.0]]);
        let pts = project_2d(&m).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((dist(pts[i], pts[j]) - s).abs() < 1e-6);
        }
        let cx: f64 = pts.iter().map(|p| p.0).sum();
        let cy: f64 = pts.iter().map(|p| p.1).sum();
        assert!(cx.abs() < 1e-12 && cy.abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_collapses() {
        let pts = project_2d(&DistanceMatrix::from_rows(&vec![vec![0.0; 4]; 4])).unwrap();
        assert!(pts.iter().all(|p| p.0.abs() < 1e-12 && p.1.abs() < 1e-12));
    }

    #[test]
    fn recovers_planar_configuration() {
        let truth = [(0.0, 0.0), (3.0, 0.0), (0.0, 4.0), (1.0, 1.0), (-2.0, 0.5)];
        let rows: Vec<Vec<f64>> = truth.iter().map(|&a| truth.iter().map(|&b| dist(a, b)).collect()).collect();
        let pts = project_2d(&DistanceMatrix::from_rows(&rows)).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((dist(pts[i], pts[j]) - rows[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(project_2d(&DistanceMatrix::from_rows(&[vec![0.0]])), Err(VisError::TooFewTopics(1))));
        let asym = DistanceMatrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]);
        assert!(matches!(project_2d(&asym), Err(VisError::BadDistances(_))));
    }
}
