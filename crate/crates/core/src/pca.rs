//! Principal component analysis by covariance eigendecomposition.
//!
//! The covariance route (mean-center, accumulate the symmetric covariance,
//! diagonalize with cyclic Jacobi) is used rather than an SVD: the feature
//! dimension is at most 784, so the full covariance is affordable and the
//! whole fit stays dependency-free and deterministic. Eigenvector signs are
//! normalized so the largest-magnitude coordinate is positive, making fits
//! bit-comparable across runs.

use crate::binio;
use crate::encoding::{FeatureSource, FeatureVector};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen_sym, Matrix};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

#[derive(Clone, Debug)]
pub struct PcaModel {
    /// Training-set mean, one entry per input feature.
    pub mean: Vec<f64>,
    /// Principal axes, one row per component, descending eigenvalue order.
    pub components: Matrix,
    /// Explained variances matching `components`, non-increasing.
    pub eigenvalues: Vec<f64>,
}

/// Fit a PCA on the rows of `data`, keeping the top `n_components` axes.
pub fn pca_fit(data: &Matrix, n_components: usize) -> Result<PcaModel> {
    let m = data.n_rows();
    let p = data.n_cols();
    if n_components == 0 || n_components > p {
        return Err(Error::Config(format!(
            "n_components {n_components} outside 1..={p}"
        )));
    }
    if m <= n_components || m < 2 {
        return Err(Error::Degenerate(format!(
            "need more than {n_components} samples to fit, got {m}"
        )));
    }

    let mut mean = vec![0.0f64; p];
    for row in data.rows_iter() {
        for (acc, &x) in mean.iter_mut().zip(row) {
            *acc += x;
        }
    }
    for v in &mut mean {
        *v /= m as f64;
    }

    // Sample covariance (1/(m-1)), upper triangle accumulated in sample
    // order then mirrored.
    let mut cov = Matrix::zeros(p, p);
    let mut centered = vec![0.0f64; p];
    for row in data.rows_iter() {
        for ((c, &x), &mu) in centered.iter_mut().zip(row).zip(&mean) {
            *c = x - mu;
        }
        for i in 0..p {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..p {
                let v = cov.get(i, j) + ci * centered[j];
                cov.set(i, j, v);
            }
        }
    }
    let scale = 1.0 / (m as f64 - 1.0);
    for i in 0..p {
        for j in i..p {
            let v = cov.get(i, j) * scale;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }

    let (eigvals, eigvecs) = jacobi_eigen_sym(&cov, 60)?;

    // Sort descending by eigenvalue; ties keep the lower original index.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eigvals[b].partial_cmp(&eigvals[a]).unwrap().then(a.cmp(&b)));

    let mut components = Matrix::zeros(n_components, p);
    let mut eigenvalues = Vec::with_capacity(n_components);
    for (row, &k) in order.iter().take(n_components).enumerate() {
        eigenvalues.push(eigvals[k].max(0.0));
        let mut axis: Vec<f64> = (0..p).map(|r| eigvecs.get(r, k)).collect();
        // Sign convention: largest-|entry| coordinate positive.
        let lead = axis
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if axis[lead] < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
        for (c, &v) in axis.iter().enumerate() {
            components.set(row, c, v);
        }
    }

    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
    })
}

/// Project an input onto the principal axes: `components · (x − mean)`.
pub fn pca_transform(model: &PcaModel, input: &[f64]) -> Result<FeatureVector> {
    if input.len() != model.mean.len() {
        return Err(Error::Validation(format!(
            "input length {} != fitted dimension {}",
            input.len(),
            model.mean.len()
        )));
    }
    let values: Vec<f64> = (0..model.components.n_rows())
        .map(|k| {
            model
                .components
                .row(k)
                .iter()
                .zip(input.iter().zip(&model.mean))
                .map(|(&w, (&x, &mu))| w * (x - mu))
                .sum()
        })
        .collect();
    FeatureVector::new(values, FeatureSource::Pca)
}

impl PcaModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut w = BufWriter::new(file);
        let io_err = |e: std::io::Error| Error::io(path.display().to_string(), e);
        binio::write_header(&mut w, binio::KIND_PCA).map_err(io_err)?;
        binio::write_u32(&mut w, self.mean.len() as u32).map_err(io_err)?;
        binio::write_u32(&mut w, self.components.n_rows() as u32).map_err(io_err)?;
        binio::write_f64s(&mut w, &self.mean).map_err(io_err)?;
        binio::write_f64s(&mut w, &self.eigenvalues).map_err(io_err)?;
        binio::write_f64s(&mut w, self.components.data()).map_err(io_err)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut r = BufReader::new(file);
        binio::read_header(&mut r, binio::KIND_PCA)?;
        let p = binio::read_u32(&mut r)? as usize;
        let n = binio::read_u32(&mut r)? as usize;
        let mean = binio::read_f64s(&mut r, p)?;
        let eigenvalues = binio::read_f64s(&mut r, n)?;
        let components = Matrix::from_vec(n, p, binio::read_f64s(&mut r, n * p)?)?;
        Ok(PcaModel {
            mean,
            components,
            eigenvalues,
        })
    }
}
