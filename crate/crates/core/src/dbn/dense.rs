//! Row-major products with a fixed summation order (ascending inner index,
//! accumulator starting at zero). Rows are computed in parallel but each
//! element is reduced sequentially, so results are bitwise reproducible.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

/// `a b`
pub fn matmul(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Array2::zeros((a.nrows(), b.ncols()));
    let b = b.as_standard_layout();
    Zip::from(out.axis_iter_mut(Axis(0)))
        .and(a.axis_iter(Axis(0)))
        .par_for_each(|mut o, ar| {
            let o = o.as_slice_mut().expect("standard layout");
            for (k, &av) in ar.iter().enumerate() {
                let br = b.row(k);
                let br = br.as_slice().expect("standard layout");
                for (x, &bv) in o.iter_mut().zip(br) {
                    *x += av * bv;
                }
            }
        });
    out
}

/// `a^T b`, reducing over rows of `a` and `b` in order.
pub fn matmul_tn(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    assert_eq!(a.nrows(), b.nrows());
    matmul(a.t().as_standard_layout().view(), b)
}

/// `a b^T`
pub fn matmul_nt(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    matmul(a, b.t().as_standard_layout().view())
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `sigmoid(x + bias)` applied row-wise in place.
pub fn add_bias_sigmoid(x: &mut Array2<f64>, bias: ArrayView1<f64>) {
    for mut row in x.rows_mut() {
        row.iter_mut().zip(bias).for_each(|(v, b)| *v = sigmoid(*v + b));
    }
}

pub fn add_bias(x: &mut Array2<f64>, bias: ArrayView1<f64>) {
    for mut row in x.rows_mut() {
        row.iter_mut().zip(bias).for_each(|(v, b)| *v += b);
    }
}

/// Column sums, rows added in order.
pub fn column_sums(x: ArrayView2<f64>) -> Array1<f64> {
    let mut out = Array1::zeros(x.ncols());
    for row in x.rows() {
        out.iter_mut().zip(row).for_each(|(o, v)| *o += v);
    }
    out
}
