//! Binary morphology and connected components on row-major bit grids.

/// Offsets of a digital disk of the given radius.
fn disk(radius: usize) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

pub fn dilate(bits: &[bool], width: usize, height: usize, radius: usize) -> Vec<bool> {
    let se = disk(radius);
    let mut out = vec![false; bits.len()];
    for y in 0..height {
        for x in 0..width {
            if !bits[y * width + x] {
                continue;
            }
            for &(dx, dy) in &se {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height {
                    out[ny as usize * width + nx as usize] = true;
                }
            }
        }
    }
    out
}

/// Erosion treating pixels outside the grid as set, so closing never
/// shrinks a mask at the border.
pub fn erode(bits: &[bool], width: usize, height: usize, radius: usize) -> Vec<bool> {
    let se = disk(radius);
    let mut out = vec![false; bits.len()];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = se.iter().all(|&(dx, dy)| {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                nx < 0 || ny < 0 || nx as usize >= width || ny as usize >= height || bits[ny as usize * width + nx as usize]
            });
        }
    }
    out
}

pub fn close(bits: &[bool], width: usize, height: usize, radius: usize) -> Vec<bool> {
    erode(&dilate(bits, width, height, radius), width, height, radius)
}

/// 8-connected component labels (0 = background, components numbered from 1
/// in raster order of their first pixel) and the component count.
pub fn label_components(bits: &[bool], width: usize, height: usize) -> (Vec<u32>, usize) {
    let mut labels = vec![0u32; bits.len()];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..bits.len() {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % width) as i64, (i / width) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    let j = ny as usize * width + nx as usize;
                    if bits[j] && labels[j] == 0 {
                        labels[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
    }
    (labels, next as usize)
}

/// 6-connected 3-D component labels over an x-fastest volume.
pub fn label_components_3d(bits: &[bool], dims: [usize; 3]) -> (Vec<u32>, usize) {
    let [nx, ny, nz] = dims;
    let mut labels = vec![0u32; bits.len()];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..bits.len() {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let x = i % nx;
            let y = (i / nx) % ny;
            let z = i / (nx * ny);
            let mut visit = |j: usize| {
                if bits[j] && labels[j] == 0 {
                    labels[j] = next;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < nx {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - nx);
            }
            if y + 1 < ny {
                visit(i + nx);
            }
            if z > 0 {
                visit(i - nx * ny);
            }
            if z + 1 < nz {
                visit(i + nx * ny);
            }
        }
    }
    (labels, next as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closing_fills_single_pixel_gap() {
        // Two blocks separated by a one-pixel column.
        let (w, h) = (7, 3);
        let bits: Vec<bool> = (0..w * h).map(|i| i % w != 3).collect();
        let c = close(&bits, w, h, 1);
        assert!(c[w + 3]);
        assert!(bits.iter().zip(&c).all(|(a, b)| !a || *b));
    }

    #[test]
    fn components() {
        // (2,1) and (1,2) touch diagonally; (0,0) is isolated.
        let bits = [true, false, false, false, false, true, false, true, false];
        let (labels, n) = label_components(&bits, 3, 3);
        assert_eq!(n, 2);
        assert_eq!(labels[0], 1);
        assert_eq!(labels[5], labels[7]);
        let (_, n3) = label_components_3d(&[true, false, false, true], [2, 1, 2]);
        assert_eq!(n3, 2);
    }
}
