//! Integer lattice helpers: primitivity and completing a primitive vector to a
//! unimodular basis.

use num_integer::Integer;

pub fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| g.gcd(&x))
}

pub fn is_primitive(v: &[i64]) -> bool {
    gcd_all(v) == 1
}

/// Square integer matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub n: usize,
    pub data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        Self { n, data: rows.iter().flat_map(|r| r.iter().copied()).collect() }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.n + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.n + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<i64> {
        (0..self.n).map(|r| self.get(r, c)).collect()
    }

    pub fn row(&self, r: usize) -> Vec<i64> {
        self.data[r * self.n..(r + 1) * self.n].to_vec()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::identity(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        (0..self.n).map(|r| (0..self.n).map(|c| self.get(r, c) * v[c]).sum()).collect()
    }

    pub fn det(&self) -> i64 {
        // Bareiss fraction-free elimination.
        let n = self.n;
        if n == 0 {
            return 1;
        }
        let mut m: Vec<i128> = self.data.iter().map(|&x| x as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if m[k * n + k] == 0 {
                let Some(p) = (k + 1..n).find(|&r| m[r * n + k] != 0) else { return 0 };
                for c in 0..n {
                    m.swap(k * n + c, p * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
                }
            }
            prev = m[k * n + k];
        }
        (sign * m[n * n - 1]) as i64
    }

    fn swap_columns(&mut self, a: usize, b: usize) {
        for r in 0..self.n {
            self.data.swap(r * self.n + a, r * self.n + b);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.n {
            self.data.swap(a * self.n + c, b * self.n + c);
        }
    }
}

/// For a primitive integer vector `normal`, returns `(u, u_inv)` with `u`
/// unimodular and `normalᵀ·u = e₀ᵀ`. Columns `1..n` of `u` are then a lattice
/// basis of `normal^⊥ ∩ ℤⁿ`, and column `0` pairs to 1 with `normal`.
pub fn complete_primitive(normal: &[i64]) -> Option<(IntMatrix, IntMatrix)> {
    let n = normal.len();
    if n == 0 || !is_primitive(normal) {
        return None;
    }
    let mut r = normal.to_vec();
    let mut u = IntMatrix::identity(n);
    let mut u_inv = IntMatrix::identity(n);
    loop {
        let nonzero: Vec<usize> = (0..n).filter(|&i| r[i] != 0).collect();
        if nonzero.len() == 1 {
            break;
        }
        let i = *nonzero.iter().min_by_key(|&&i| r[i].abs()).unwrap();
        for &j in &nonzero {
            if j == i {
                continue;
            }
            let q = r[j].div_euclid(r[i]);
            // column op: col_j -= q col_i; inverse gets row_i += q row_j
            r[j] -= q * r[i];
            for row in 0..n {
                let val = u.get(row, j) - q * u.get(row, i);
                u.set(row, j, val);
            }
            for col in 0..n {
                let val = u_inv.get(i, col) + q * u_inv.get(j, col);
                u_inv.set(i, col, val);
            }
        }
    }
    let i = (0..n).find(|&i| r[i] != 0).unwrap();
    if r[i] == -1 {
        for row in 0..n {
            let val = -u.get(row, i);
            u.set(row, i, val);
        }
        for col in 0..n {
            let val = -u_inv.get(i, col);
            u_inv.set(i, col, val);
        }
    }
    if i != 0 {
        u.swap_columns(0, i);
        u_inv.swap_rows(0, i);
    }
    Some((u, u_inv))
}
