use super::matrix::Matrix;

/// Bilinear interpolation of a `width` x `height` field given by `f(col, row)`
/// at continuous position (x = column, y = row). Grid values sit at integer
/// coordinates; neighbours outside the field contribute zero.
#[inline]
pub fn bilinear_at(width: usize, height: usize, x: f64, y: f64, f: impl Fn(usize, usize) -> f64) -> f64 {
    if !(x > -1.0 && y > -1.0 && x < width as f64 && y < height as f64) {
        return 0.0;
    }
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let at = |xi: i64, yi: i64| -> f64 {
        if xi < 0 || yi < 0 || xi >= width as i64 || yi >= height as i64 {
            0.0
        } else {
            f(xi as usize, yi as usize)
        }
    };
    let mut v = 0.0;
    if fx < 1.0 && fy < 1.0 {
        v += (1.0 - fx) * (1.0 - fy) * at(x0, y0);
    }
    if fx > 0.0 {
        v += fx * (1.0 - fy) * at(x0 + 1, y0);
    }
    if fy > 0.0 {
        v += (1.0 - fx) * fy * at(x0, y0 + 1);
    }
    if fx > 0.0 && fy > 0.0 {
        v += fx * fy * at(x0 + 1, y0 + 1);
    }
    v
}

/// Bilinear sample of an H x W map (rows = y, cols = x).
pub fn bilinear_sample(map: &Matrix, x: f64, y: f64) -> f64 {
    bilinear_at(map.cols, map.rows, x, y, |c, r| map.get(r, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_grid_and_ramps() {
        let m = Matrix::from_fn(4, 5, |r, c| (r * 10 + c) as f64);
        assert_eq!(bilinear_sample(&m, 3.0, 2.0), 23.0);
        assert_eq!(bilinear_sample(&m, 4.0, 3.0), 34.0);
        assert!((bilinear_sample(&m, 2.5, 1.25) - 15.0).abs() < 1e-12);
        assert_eq!(bilinear_sample(&m, -5.0, 1.0), 0.0);
        assert_eq!(bilinear_sample(&m, 1.0, 4.0), 0.0);
        // Half a pixel past the edge blends with zero padding.
        assert!((bilinear_sample(&m, 4.5, 0.0) - 2.0).abs() < 1e-12);
    }
}
