//! Small least-squares fits.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute deviation of the data from the fitted line.
    pub max_residual: f64,
    pub rms_residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "line fit needs >= 2 paired points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (sxx, sxy) = x.iter().zip(y).fold((0.0, 0.0), |(sxx, sxy), (xi, yi)| {
        (sxx + (xi - mx).powi(2), sxy + (xi - mx) * (yi - my))
    });
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "line fit needs distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (max_residual, ss) = x.iter().zip(y).fold((0.0f64, 0.0), |(m, ss), (xi, yi)| {
        let r = yi - (intercept + slope * xi);
        (m.max(r.abs()), ss + r * r)
    });
    Ok(LineFit {
        slope,
        intercept,
        max_residual,
        rms_residual: (ss / n).sqrt(),
    })
}

/// y ≈ c0 + c1·x + c2·x².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub coefficients: [f64; 3],
    pub max_residual: f64,
}

impl QuadraticFit {
    pub fn eval(&self, x: f64) -> f64 {
        let [c0, c1, c2] = self.coefficients;
        c0 + x * (c1 + x * c2)
    }
}

pub fn fit_quadratic(x: &[f64], y: &[f64]) -> Result<QuadraticFit> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "quadratic fit needs >= 3 points, got {}",
            x.len()
        )));
    }
    // Work in a centred, scaled abscissa for conditioning.
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let sx = x.iter().map(|v| (v - mx).abs()).fold(0.0, f64::max);
    if sx == 0.0 {
        return Err(Error::InsufficientData(
            "quadratic fit needs distinct abscissae".into(),
        ));
    }
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (xi, yi) in x.iter().zip(y) {
        let u = (xi - mx) / sx;
        let row = [1.0, u, u * u];
        for r in 0..3 {
            aty[r] += row[r] * yi;
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    let [b0, b1, b2] = solve3(ata, aty)
        .ok_or_else(|| Error::InsufficientData("quadratic fit is singular".into()))?;
    // Expand back to the raw abscissa.
    let c2 = b2 / (sx * sx);
    let c1 = b1 / sx - 2.0 * b2 * mx / (sx * sx);
    let c0 = b0 - b1 * mx / sx + b2 * mx * mx / (sx * sx);
    let mut fit = QuadraticFit {
        coefficients: [c0, c1, c2],
        max_residual: 0.0,
    };
    fit.max_residual = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let u = (xi - mx) / sx;
            (yi - (b0 + b1 * u + b2 * u * u)).abs()
        })
        .fold(0.0, f64::max);
    Ok(fit)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
