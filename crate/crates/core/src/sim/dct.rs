use std::f64::consts::PI;

/// Orthonormal DCT-II of size `n`, applied separably to square blocks.
#[derive(Debug, Clone)]
pub struct Dct {
    n: usize,
    // basis[k * n + i] = c_k * cos(pi * (2i + 1) * k / 2n)
    basis: Vec<f64>,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        let mut basis = vec![0.0; n * n];
        for k in 0..n {
            let ck = if k == 0 {
                (1.0 / n as f64).sqrt()
            } else {
                (2.0 / n as f64).sqrt()
            };
            for i in 0..n {
                basis[k * n + i] = ck * (PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
            }
        }
        Self { n, basis }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// `C X C^T` in place, with `tmp` as scratch of the same size.
    pub fn forward(&self, block: &mut [f64], tmp: &mut [f64]) {
        let n = self.n;
        let c = &self.basis;
        for k in 0..n {
            for x in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += c[k * n + i] * block[i * n + x];
                }
                tmp[k * n + x] = s;
            }
        }
        for k in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    s += tmp[k * n + j] * c[l * n + j];
                }
                block[k * n + l] = s;
            }
        }
    }

    /// `C^T Y C` in place.
    pub fn inverse(&self, block: &mut [f64], tmp: &mut [f64]) {
        let n = self.n;
        let c = &self.basis;
        for i in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += c[k * n + i] * block[k * n + l];
                }
                tmp[i * n + l] = s;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += tmp[i * n + l] * c[l * n + j];
                }
                block[i * n + j] = s;
            }
        }
    }
}
