//! Conservative oversampling: SMOTE with the interpolation weight drawn
//! from `Unif(0, 0.5)` instead of `Unif(0, 1)`, so synthetic points stay
//! nearer their source observation than its neighbour.

use ndarray::Array2;
use rand::Rng;

use crate::dataset::LabeledDataset;
use crate::error::{NpmcError, Result};

/// Where a synthetic row came from: `x = weight * x[neighbor] + (1 - weight) * x[source]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub source: usize,
    pub neighbor: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct SmoteOutput {
    /// Original rows first (unchanged, same order), then the synthetic rows.
    pub dataset: LabeledDataset,
    /// One entry per synthetic row, indices into the input dataset.
    pub origins: Vec<SyntheticOrigin>,
}

/// Enlarge every class `multiplier`-fold. See [`smote_half_traced`].
pub fn smote_half<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    neighbors: usize,
    multiplier: usize,
    rng: &mut R,
) -> Result<LabeledDataset> {
    smote_half_traced(ds, neighbors, multiplier, rng).map(|o| o.dataset)
}

/// For each row, emit `multiplier - 1` synthetic rows toward uniformly chosen
/// members (with replacement) of its `neighbors` nearest same-class rows.
pub fn smote_half_traced<R: Rng + ?Sized>(
    ds: &LabeledDataset,
    neighbors: usize,
    multiplier: usize,
    rng: &mut R,
) -> Result<SmoteOutput> {
    if multiplier < 1 {
        return Err(NpmcError::InvalidArgument("multiplier must be at least 1".into()));
    }
    if neighbors < 1 {
        return Err(NpmcError::InvalidArgument("neighbors must be at least 1".into()));
    }
    if multiplier == 1 {
        return Ok(SmoteOutput {
            dataset: ds.clone(),
            origins: Vec::new(),
        });
    }
    ds.require_class_counts(neighbors + 1)?;

    let x = ds.features();
    let p = ds.num_features();
    let groups = ds.class_indices();
    let mut origins = Vec::with_capacity(ds.len() * (multiplier - 1));
    for (i, &y) in ds.labels().iter().enumerate() {
        let near = nearest_in_class(ds, i, &groups[y], neighbors);
        for _ in 1..multiplier {
            let neighbor = near[rng.random_range(0..near.len())];
            let weight = rng.random_range(0.0..0.5);
            origins.push(SyntheticOrigin {
                source: i,
                neighbor,
                weight,
            });
        }
    }

    let mut synth = Array2::zeros((origins.len(), p));
    let mut labels = Vec::with_capacity(origins.len());
    for (row, o) in origins.iter().enumerate() {
        for j in 0..p {
            synth[[row, j]] = o.weight * x[[o.neighbor, j]] + (1.0 - o.weight) * x[[o.source, j]];
        }
        labels.push(ds.labels()[o.source]);
    }
    let mut extra = LabeledDataset::new(synth, labels, ds.num_classes())?;
    if let Some(names) = ds.class_names() {
        extra = extra.with_class_names(names.to_vec())?;
    }
    Ok(SmoteOutput {
        dataset: ds.concat(&extra)?,
        origins,
    })
}

/// The `k` nearest same-class rows of row `i`, excluding `i`. Ties go to
/// the lower index.
fn nearest_in_class(ds: &LabeledDataset, i: usize, group: &[usize], k: usize) -> Vec<usize> {
    let xi = ds.row(i);
    let mut d: Vec<(f64, usize)> = group
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| {
            let dist = ds.row(j).iter().zip(xi.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            (dist, j)
        })
        .collect();
    d.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.truncate(k);
    d.into_iter().map(|(_, j)| j).collect()
}
