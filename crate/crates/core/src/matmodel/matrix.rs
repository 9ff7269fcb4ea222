//! Dense complex matrices for the finite-N sampler.
//!
//! Storage is split re/im (structure of arrays) so the i-k-j product loops
//! vectorize. Hermitian tuples are parametrized by real coordinates in the
//! order: n diagonal entries, then (re, im) per pair k < l; that matches the
//! Lebesgue measure the ensemble density is written against.

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl CMatrix {
    pub fn zero(n: usize) -> CMatrix {
        CMatrix {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> CMatrix {
        let mut m = CMatrix::zero(n);
        for k in 0..n {
            m.re[k * n + k] = 1.0;
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> (f64, f64) {
        (self.re[i * self.n + j], self.im[i * self.n + j])
    }

    /// Number of real coordinates of a Hermitian matrix: n^2.
    pub fn coord_len(n: usize) -> usize {
        n * n
    }

    /// Hermitian matrix from real coordinates (diagonal first, then
    /// re/im per off-diagonal pair in row-major k < l order).
    pub fn from_coords(n: usize, coords: &[f64]) -> CMatrix {
        assert_eq!(coords.len(), Self::coord_len(n));
        let mut m = CMatrix::zero(n);
        for k in 0..n {
            m.re[k * n + k] = coords[k];
        }
        let mut idx = n;
        for k in 0..n {
            for l in k + 1..n {
                let x = coords[idx];
                let y = coords[idx + 1];
                idx += 2;
                m.re[k * n + l] = x;
                m.im[k * n + l] = y;
                m.re[l * n + k] = x;
                m.im[l * n + k] = -y;
            }
        }
        m
    }

    pub fn to_coords(&self) -> Vec<f64> {
        let n = self.n;
        let mut coords = Vec::with_capacity(Self::coord_len(n));
        for k in 0..n {
            coords.push(self.re[k * n + k]);
        }
        for k in 0..n {
            for l in k + 1..n {
                coords.push(self.re[k * n + l]);
                coords.push(self.im[k * n + l]);
            }
        }
        coords
    }

    pub fn trace(&self) -> (f64, f64) {
        let n = self.n;
        let mut tr = (0.0, 0.0);
        for k in 0..n {
            tr.0 += self.re[k * n + k];
            tr.1 += self.im[k * n + k];
        }
        tr
    }

    /// Frobenius inner product Re tr(A B†) restricted to the real part.
    pub fn frob_sq(&self) -> f64 {
        self.re.iter().map(|x| x * x).sum::<f64>() + self.im.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let ar = self.re[i * n + k];
                let ai = self.im[i * n + k];
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                axpy_complex(
                    ar,
                    ai,
                    &other.re[k * n..k * n + n],
                    &other.im[k * n..k * n + n],
                    &mut out.re[i * n..i * n + n],
                    &mut out.im[i * n..i * n + n],
                );
            }
        }
        out
    }

    /// Product of two matrices whose result is known Hermitian (for example
    /// A*A or A^2*A with A Hermitian): computes the upper triangle and
    /// mirrors it, saving half the work. Rows are processed in pairs so
    /// each B-row pass feeds two output rows.
    pub fn mul_hermitian_result(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMatrix::zero(n);
        let mut i = 0;
        while i < n {
            let pair = i + 1 < n;
            for k in 0..n {
                let ar0 = self.re[i * n + k];
                let ai0 = self.im[i * n + k];
                if pair {
                    let ar1 = self.re[(i + 1) * n + k];
                    let ai1 = self.im[(i + 1) * n + k];
                    // both output rows start at column i; row i+1's first
                    // entry is reconstructed by the mirror pass below
                    let (row_i, row_i1) = out.re.split_at_mut((i + 1) * n);
                    let cr0 = &mut row_i[i * n + i..];
                    let cr1 = &mut row_i1[i..n];
                    let (irow_i, irow_i1) = out.im.split_at_mut((i + 1) * n);
                    let ci0 = &mut irow_i[i * n + i..];
                    let ci1 = &mut irow_i1[i..n];
                    let br = &other.re[k * n + i..k * n + n];
                    let bi = &other.im[k * n + i..k * n + n];
                    let rows = cr0
                        .iter_mut()
                        .zip(ci0.iter_mut())
                        .zip(cr1.iter_mut().zip(ci1.iter_mut()));
                    for (((cr0, ci0), (cr1, ci1)), (br, bi)) in rows.zip(br.iter().zip(bi)) {
                        *cr0 += ar0 * *br - ai0 * *bi;
                        *ci0 += ar0 * *bi + ai0 * *br;
                        *cr1 += ar1 * *br - ai1 * *bi;
                        *ci1 += ar1 * *bi + ai1 * *br;
                    }
                } else {
                    axpy_complex(
                        ar0,
                        ai0,
                        &other.re[k * n + i..k * n + n],
                        &other.im[k * n + i..k * n + n],
                        &mut out.re[i * n + i..i * n + n],
                        &mut out.im[i * n + i..i * n + n],
                    );
                }
            }
            i += if pair { 2 } else { 1 };
        }
        for i in 0..n {
            for j in i + 1..n {
                out.re[j * n + i] = out.re[i * n + j];
                out.im[j * n + i] = -out.im[i * n + j];
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &CMatrix, factor: f64) {
        for (a, b) in self.re.iter_mut().zip(&other.re) {
            *a += factor * b;
        }
        for (a, b) in self.im.iter_mut().zip(&other.im) {
            *a += factor * b;
        }
    }

    pub fn hermitian_part(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                out.re[i * n + j] = 0.5 * (self.re[i * n + j] + self.re[j * n + i]);
                out.im[i * n + j] = 0.5 * (self.im[i * n + j] - self.im[j * n + i]);
            }
        }
        out
    }
}

/// c += (ar + i ai) * b over row slices; zipped so the bound checks drop
/// out and the loop vectorizes.
#[inline]
fn axpy_complex(ar: f64, ai: f64, br: &[f64], bi: &[f64], cr: &mut [f64], ci: &mut [f64]) {
    for (((cr, ci), br), bi) in cr.iter_mut().zip(ci.iter_mut()).zip(br).zip(bi) {
        *cr += ar * *br - ai * *bi;
        *ci += ar * *bi + ai * *br;
    }
}

/// Evaluate a word on a tuple of matrices; the empty word is the identity.
pub fn eval_word(mats: &[CMatrix], word: &[u8]) -> CMatrix {
    let n = mats[0].n;
    match word.len() {
        0 => CMatrix::identity(n),
        1 => mats[(word[0] - 1) as usize].clone(),
        _ => {
            let mut acc = mats[(word[0] - 1) as usize].clone();
            for &c in &word[1..] {
                acc = acc.mul(&mats[(c - 1) as usize]);
            }
            acc
        }
    }
}

/// Re (1/N) tr of a word on a Hermitian tuple, the empirical moment.
pub fn normalized_trace(mats: &[CMatrix], word: &[u8]) -> f64 {
    if word.is_empty() {
        return 1.0;
    }
    let n = mats[0].n;
    if word.len() == 1 {
        return mats[(word[0] - 1) as usize].trace().0 / n as f64;
    }
    // split the word to balance the two factors, then trace the product
    let half = word.len() / 2;
    let a = eval_word(mats, &word[..half]);
    let b = eval_word(mats, &word[half..]);
    let mut tr = 0.0;
    for i in 0..n {
        let arow_r = &a.re[i * n..i * n + n];
        let arow_i = &a.im[i * n..i * n + n];
        for j in 0..n {
            // (AB)_{ii} contribution: A_{ij} B_{ji}
            tr += arow_r[j] * b.re[j * n + i] - arow_i[j] * b.im[j * n + i];
        }
    }
    tr / n as f64
}
