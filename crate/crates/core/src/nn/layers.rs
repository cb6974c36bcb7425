use rand::Rng;

use super::{Array, NnError};
use crate::scalar::Scalar;

/// Looks up one row per token in each table and concatenates them.
///
/// `ids[c][t]` is the id of token `t` in channel `c`; the result is `n × D` with
/// `D` the sum of the table widths.
pub fn embed_concat<T: Scalar>(ids: &[&[u32]], tables: &[&Array<T>]) -> Result<Array<T>, NnError> {
    if ids.len() != tables.len() {
        return Err(NnError::Shape(format!("{} id channels for {} tables", ids.len(), tables.len())));
    }
    let n = ids.first().map_or(0, |c| c.len());
    if ids.iter().any(|c| c.len() != n) {
        return Err(NnError::Shape("channels differ in token count".into()));
    }
    let width: usize = tables.iter().map(|t| t.cols()).sum();
    let mut out = Array::zeros(&[n, width]);
    let mut offset = 0;
    for (c, (chan, table)) in ids.iter().zip(tables).enumerate() {
        let w = table.cols();
        for (t, &id) in chan.iter().enumerate() {
            if id as usize >= table.rows() {
                return Err(NnError::IdOutOfRange {
                    channel: c,
                    id,
                    rows: table.rows(),
                });
            }
            out.row_mut(t)[offset..offset + w].copy_from_slice(table.row(id as usize));
        }
        offset += w;
    }
    Ok(out)
}

/// Scatters the output gradient additively into the table rows that were looked up.
/// `on_row(channel, row)` is called once per touched row occurrence.
pub fn embed_concat_backward<T: Scalar>(
    dout: &Array<T>,
    ids: &[&[u32]],
    table_grads: &mut [&mut Array<T>],
    mut on_row: impl FnMut(usize, usize),
) {
    let mut offset = 0;
    for (c, (chan, grad)) in ids.iter().zip(table_grads.iter_mut()).enumerate() {
        let w = grad.cols();
        for (t, &id) in chan.iter().enumerate() {
            let src = &dout.row(t)[offset..offset + w];
            for (g, &d) in grad.row_mut(id as usize).iter_mut().zip(src) {
                *g += d;
            }
            on_row(c, id as usize);
        }
        offset += w;
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Valid 1-D convolution over tokens followed by ReLU.
///
/// `input` is `n × D`, `filters` is `F × h × D`, `bias` has `F` entries; the result is
/// `(n − h + 1) × F` with `map[t][f] = max(0, bias[f] + Σ input[t+i][j]·filter[f][i][j])`.
pub fn conv1d_relu<T: Scalar>(input: &Array<T>, filters: &Array<T>, bias: &[T]) -> Result<Array<T>, NnError> {
    let (n, d) = (input.rows(), input.cols());
    let [f_count, h, fd] = filters.shape()[..] else {
        return Err(NnError::Shape(format!("filters must be rank 3, got {:?}", filters.shape())));
    };
    if fd != d {
        return Err(NnError::Shape(format!("filter width {fd} vs input width {d}")));
    }
    if bias.len() != f_count {
        return Err(NnError::Shape(format!("{} biases for {f_count} filters", bias.len())));
    }
    if h == 0 || n < h {
        return Err(NnError::Shape(format!("{n} tokens shorter than filter height {h}")));
    }
    let m = n - h + 1;
    let window = h * d;
    let x = input.data();
    let mut out = Array::zeros(&[m, f_count]);
    for t in 0..m {
        let xs = &x[t * d..t * d + window];
        let row = out.row_mut(t);
        for (f, slot) in row.iter_mut().enumerate() {
            let z = bias[f] + dot(xs, filters.row(f));
            *slot = if z > T::zero() { z } else { T::zero() };
        }
    }
    Ok(out)
}

pub struct ConvGrads<T> {
    pub input: Array<T>,
    pub filters: Array<T>,
    pub bias: Vec<T>,
}

/// Backward pass of [`conv1d_relu`]. `maps` is the forward output; positions where it
/// is zero pass no gradient.
pub fn conv1d_relu_backward<T: Scalar>(
    input: &Array<T>,
    filters: &Array<T>,
    maps: &Array<T>,
    dmaps: &Array<T>,
) -> ConvGrads<T> {
    let mut grads = ConvGrads {
        input: Array::zeros(input.shape()),
        filters: Array::zeros(filters.shape()),
        bias: vec![T::zero(); filters.shape()[0]],
    };
    conv1d_relu_backward_into(input, filters, maps, dmaps, &mut grads.input, &mut grads.filters, &mut grads.bias);
    grads
}

/// Like [`conv1d_relu_backward`], adding into existing gradient buffers.
pub fn conv1d_relu_backward_into<T: Scalar>(
    input: &Array<T>,
    filters: &Array<T>,
    maps: &Array<T>,
    dmaps: &Array<T>,
    dinput: &mut Array<T>,
    dfilters: &mut Array<T>,
    dbias: &mut [T],
) {
    let d = input.cols();
    let (f_count, h) = (filters.shape()[0], filters.shape()[1]);
    let window = h * d;
    let x = input.data();
    for t in 0..maps.rows() {
        for f in 0..f_count {
            if maps.at2(t, f) <= T::zero() {
                continue;
            }
            let g = dmaps.at2(t, f);
            if g == T::zero() {
                continue;
            }
            dbias[f] += g;
            axpy(g, &x[t * d..t * d + window], dfilters.row_mut(f));
            axpy(g, filters.row(f), &mut dinput.data_mut()[t * d..t * d + window]);
        }
    }
}

/// Max over the leading axis for each column; ties resolve to the first position.
pub fn max_pool<T: Scalar>(maps: &Array<T>) -> Result<(Vec<T>, Vec<usize>), NnError> {
    if maps.rows() == 0 {
        return Err(NnError::Empty("max_pool over zero positions"));
    }
    let cols = maps.cols();
    let mut best: Vec<T> = maps.row(0).to_vec();
    let mut arg = vec![0; cols];
    for t in 1..maps.rows() {
        for (f, &v) in maps.row(t).iter().enumerate() {
            if v > best[f] {
                best[f] = v;
                arg[f] = t;
            }
        }
    }
    Ok((best, arg))
}

pub fn max_pool_backward<T: Scalar>(dout: &[T], argmax: &[usize], positions: usize) -> Array<T> {
    let mut d = Array::zeros(&[positions, dout.len()]);
    for (f, (&g, &t)) in dout.iter().zip(argmax).enumerate() {
        d.row_mut(t)[f] = g;
    }
    d
}

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn logits<T: Scalar>(x: &[T], w: &Array<T>, b: &[T]) -> Result<Vec<T>, NnError> {
    let [classes, k] = w.shape()[..] else {
        return Err(NnError::Shape(format!("dense weights must be rank 2, got {:?}", w.shape())));
    };
    if k != x.len() || b.len() != classes {
        return Err(NnError::Shape(format!(
            "dense {classes}×{k} with {} inputs and {} biases",
            x.len(),
            b.len()
        )));
    }
    Ok((0..classes).map(|c| b[c] + dot(w.row(c), x)).collect())
}

/// Fully connected layer with softmax, no loss.
pub fn dense_softmax<T: Scalar>(x: &[T], w: &Array<T>, b: &[T]) -> Result<Vec<T>, NnError> {
    Ok(softmax(&logits(x, w, b)?))
}

pub struct DenseGrads<T> {
    pub probs: Vec<T>,
    pub loss: T,
    pub w: Array<T>,
    pub b: Vec<T>,
    pub x: Vec<T>,
}

/// Fully connected layer, softmax and cross-entropy `−log p[label]`, with gradients.
pub fn dense_softmax_xent<T: Scalar>(x: &[T], w: &Array<T>, b: &[T], label: usize) -> Result<DenseGrads<T>, NnError> {
    let z = logits(x, w, b)?;
    let classes = z.len();
    if label >= classes {
        return Err(NnError::LabelOutOfRange { label, classes });
    }
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let log_sum = z.iter().map(|&v| (v - max).exp()).sum::<T>().ln() + max;
    let loss = log_sum - z[label];
    let probs = softmax(&z);

    let mut dz = probs.clone();
    dz[label] -= T::one();
    let mut dw = Array::zeros(w.shape());
    let mut dx = vec![T::zero(); x.len()];
    for (c, &g) in dz.iter().enumerate() {
        axpy(g, x, dw.row_mut(c));
        axpy(g, w.row(c), &mut dx);
    }
    Ok(DenseGrads {
        probs,
        loss,
        w: dw,
        b: dz,
        x: dx,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Inference,
}

/// Inverted dropout. Returns the output and the per-entry multiplier (0 or 1/(1−p)),
/// which is also the backward factor.
pub fn dropout<T: Scalar, R: Rng + ?Sized>(x: &[T], p_drop: f64, mode: DropoutMode, rng: &mut R) -> (Vec<T>, Vec<T>) {
    assert!((0.0..1.0).contains(&p_drop), "dropout probability must be in [0, 1)");
    if mode == DropoutMode::Inference || p_drop == 0.0 {
        return (x.to_vec(), vec![T::one(); x.len()]);
    }
    let keep = T::lit(1.0 / (1.0 - p_drop));
    let mask: Vec<T> = x
        .iter()
        .map(|_| if rng.gen::<f64>() < p_drop { T::zero() } else { keep })
        .collect();
    let out = x.iter().zip(&mask).map(|(&v, &m)| v * m).collect();
    (out, mask)
}
