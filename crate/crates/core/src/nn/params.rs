use std::collections::BTreeSet;

use super::{Array, NnError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Dense,
    /// Lookup table whose row 0 is the padding row: kept at zero, never updated.
    Embedding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub name: String,
    pub value: Array<T>,
    pub kind: ParamKind,
}

/// Ordered, named trainable arrays.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet<T> {
    pub params: Vec<Param<T>>,
}

impl<T: Scalar> ParamSet<T> {
    pub fn push(&mut self, name: impl Into<String>, value: Array<T>, kind: ParamKind) -> usize {
        self.params.push(Param {
            name: name.into(),
            value,
            kind,
        });
        self.params.len() - 1
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, i: usize) -> &Array<T> {
        &self.params[i].value
    }

    pub fn get_mut(&mut self, i: usize) -> &mut Array<T> {
        &mut self.params[i].value
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }
}

/// Gradient arrays mirroring a [`ParamSet`]. Embedding gradients track which rows
/// were touched so updates and resets stay proportional to the rows in use.
#[derive(Debug, Clone)]
pub struct Grads<T> {
    arrays: Vec<Array<T>>,
    rows: Vec<Option<BTreeSet<usize>>>,
}

impl<T: Scalar> Grads<T> {
    pub fn zeros_like(params: &ParamSet<T>) -> Self {
        Grads {
            arrays: params.params.iter().map(|p| Array::zeros(p.value.shape())).collect(),
            rows: params
                .params
                .iter()
                .map(|p| (p.kind == ParamKind::Embedding).then(BTreeSet::new))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.arrays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrays.is_empty()
    }

    pub fn get(&self, i: usize) -> &Array<T> {
        &self.arrays[i]
    }

    /// Mutable access for dense accumulation.
    pub fn array_mut(&mut self, i: usize) -> &mut Array<T> {
        &mut self.arrays[i]
    }

    pub fn mark_row(&mut self, i: usize, row: usize) {
        if let Some(rows) = &mut self.rows[i] {
            rows.insert(row);
        }
    }

    /// Disjoint mutable borrows of several gradient arrays at once.
    pub fn arrays_mut(&mut self, which: &[usize]) -> Vec<&mut Array<T>> {
        let mut slots: Vec<Option<&mut Array<T>>> = self.arrays.iter_mut().map(Some).collect();
        which
            .iter()
            .map(|&i| slots[i].take().expect("distinct gradient indices"))
            .collect()
    }

    fn touched(&self, i: usize) -> Box<dyn Iterator<Item = usize> + '_> {
        match &self.rows[i] {
            Some(rows) => Box::new(rows.iter().copied()),
            None => Box::new(0..self.arrays[i].rows().max(1)),
        }
    }

    /// Adds `scale · other` into `self`.
    pub fn accumulate(&mut self, other: &Grads<T>, scale: T) {
        for i in 0..self.arrays.len() {
            if self.arrays[i].shape().is_empty() || other.rows[i].is_none() {
                for (a, &b) in self.arrays[i].data_mut().iter_mut().zip(other.arrays[i].data()) {
                    *a += scale * b;
                }
                continue;
            }
            for r in other.touched(i) {
                for (a, &b) in self.arrays[i].row_mut(r).iter_mut().zip(other.arrays[i].row(r)) {
                    *a += scale * b;
                }
                self.mark_row(i, r);
            }
        }
    }

    pub fn scale(&mut self, s: T) {
        for (array, rows) in self.arrays.iter_mut().zip(&self.rows) {
            match rows {
                None => array.data_mut().iter_mut().for_each(|v| *v *= s),
                Some(rows) => {
                    for &r in rows {
                        array.row_mut(r).iter_mut().for_each(|v| *v *= s);
                    }
                }
            }
        }
    }

    pub fn clear(&mut self) {
        for i in 0..self.arrays.len() {
            match self.rows[i].take() {
                Some(rows) => {
                    for &r in &rows {
                        self.arrays[i].row_mut(r).fill(T::zero());
                    }
                    self.rows[i] = Some(BTreeSet::new());
                }
                None => self.arrays[i].fill(T::zero()),
            }
        }
    }
}

/// Plain SGD: `p ← p − lr·g` for every parameter, skipping embedding padding rows.
///
/// Fails without touching any parameter if a gradient entry is not finite.
pub fn sgd_step<T: Scalar>(params: &mut ParamSet<T>, grads: &Grads<T>, lr: T) -> Result<(), NnError> {
    if grads.len() != params.len() {
        return Err(NnError::Shape(format!("{} gradients for {} parameters", grads.len(), params.len())));
    }
    for (i, p) in params.params.iter().enumerate() {
        if !p.value.same_shape(grads.get(i)) {
            return Err(NnError::Shape(format!("gradient shape differs for `{}`", p.name)));
        }
        let finite = match &grads.rows[i] {
            Some(rows) => rows.iter().all(|&r| grads.get(i).row(r).iter().all(|v| v.is_finite())),
            None => grads.get(i).data().iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(NnError::NonFinite(p.name.clone()));
        }
    }
    for (i, p) in params.params.iter_mut().enumerate() {
        let g = grads.get(i);
        match &grads.rows[i] {
            Some(rows) => {
                for &r in rows.iter().filter(|&&r| !(p.kind == ParamKind::Embedding && r == 0)) {
                    for (v, &d) in p.value.row_mut(r).iter_mut().zip(g.row(r)) {
                        *v -= lr * d;
                    }
                }
            }
            None => {
                let skip = if p.kind == ParamKind::Embedding { p.value.cols() } else { 0 };
                for (v, &d) in p.value.data_mut().iter_mut().zip(g.data()).skip(skip) {
                    *v -= lr * d;
                }
            }
        }
    }
    Ok(())
}
