use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bundle::FeatureNorm;
use crate::error::{Error, Result};
use crate::features::{FeatureLayout, FeatureVector};

/// Nearest-centroid classifier over feature vectors. Class names are kept
/// sorted so ties resolve to the lexicographically first class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    pub layout: FeatureLayout,
    pub class_names: Vec<String>,
    pub centroids: Vec<Vec<f64>>,
    /// Z-score normalisation applied to both query and centroids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_norm: Option<FeatureNorm>,
}

impl CentroidModel {
    pub fn new(
        layout: FeatureLayout,
        classes: BTreeMap<String, Vec<f64>>,
        feature_norm: Option<FeatureNorm>,
    ) -> Result<Self> {
        let (class_names, centroids): (Vec<_>, Vec<_>) = classes.into_iter().unzip();
        let model = CentroidModel {
            layout,
            class_names,
            centroids,
            feature_norm,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.layout.len();
        if self.class_names.is_empty() || self.class_names.len() != self.centroids.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} class names for {} centroids",
                self.class_names.len(),
                self.centroids.len()
            )));
        }
        if self.class_names.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::LayoutMismatch(
                "class names must be unique and sorted".into(),
            ));
        }
        if let Some(c) = self.centroids.iter().find(|c| c.len() != n) {
            return Err(Error::LayoutMismatch(format!(
                "centroid of {} values for a {n}-value layout",
                c.len()
            )));
        }
        if let Some(norm) = &self.feature_norm {
            if norm.mean.len() != n || norm.std.len() != n {
                return Err(Error::LayoutMismatch("feature_norm length".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: CentroidModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }

    fn normalised(&self, values: &[f64]) -> Vec<f64> {
        let mut v = values.to_vec();
        if let Some(norm) = &self.feature_norm {
            norm.apply(&mut v);
        }
        v
    }

    /// Squared distance to every class centroid, in class-name order.
    pub fn distances(&self, features: &FeatureVector) -> Result<Vec<f64>> {
        if features.layout != self.layout || features.values.len() != self.layout.len() {
            return Err(Error::LayoutMismatch(format!(
                "features are {:?} ({} values), model expects {:?}",
                features.layout,
                features.values.len(),
                self.layout
            )));
        }
        let q = self.normalised(&features.values);
        Ok(self
            .centroids
            .iter()
            .map(|c| {
                let c = self.normalised(c);
                q.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum()
            })
            .collect())
    }
}

/// Name of the nearest centroid (Euclidean); exact ties go to the
/// lexicographically first class name.
pub fn centroid_classify(features: &FeatureVector, model: &CentroidModel) -> Result<String> {
    let d = model.distances(features)?;
    let mut best = 0;
    for i in 1..d.len() {
        if d[i] < d[best] {
            best = i;
        }
    }
    Ok(model.class_names[best].clone())
}

/// Per-class mean feature vectors, with z-score normalisation computed over
/// the pooled examples when `normalise` is set.
pub fn fit_centroids(examples: &[(String, FeatureVector)], normalise: bool) -> Result<CentroidModel> {
    let Some((_, first)) = examples.first() else {
        return Err(Error::EmptyInput);
    };
    let layout = first.layout;
    let n = layout.len();
    let mut sums: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    for (label, fv) in examples {
        if fv.layout != layout || fv.values.len() != n {
            return Err(Error::LayoutMismatch("mixed feature layouts".into()));
        }
        let entry = sums.entry(label.clone()).or_insert_with(|| (vec![0.0; n], 0));
        entry.0.iter_mut().zip(&fv.values).for_each(|(s, v)| *s += v);
        entry.1 += 1;
    }
    let classes = sums
        .into_iter()
        .map(|(k, (s, count))| (k, s.into_iter().map(|v| v / count as f64).collect()))
        .collect();
    let norm = normalise.then(|| {
        let count = examples.len() as f64;
        let mean: Vec<f64> = (0..n)
            .map(|j| examples.iter().map(|(_, f)| f.values[j]).sum::<f64>() / count)
            .collect();
        let std = (0..n)
            .map(|j| {
                let var = examples
                    .iter()
                    .map(|(_, f)| (f.values[j] - mean[j]).powi(2))
                    .sum::<f64>()
                    / count;
                // near-constant features carry no information; leave them unscaled
                if var.sqrt() > 1e-9 {
                    var.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        FeatureNorm { mean, std }
    });
    CentroidModel::new(layout, classes, norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: Vec<f64>) -> FeatureVector {
        let mut v = values;
        v.resize(FeatureLayout::Accelerometer.len(), 0.0);
        FeatureVector {
            layout: FeatureLayout::Accelerometer,
            values: v,
        }
    }

    fn model(points: &[(&str, Vec<f64>)]) -> CentroidModel {
        CentroidModel::new(
            FeatureLayout::Accelerometer,
            points.iter().map(|(k, v)| (k.to_string(), fv(v.clone()).values)).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn exact_centroid_hit() {
        let m = model(&[("Sit", vec![1.0, 2.0]), ("Walk", vec![5.0, 5.0])]);
        assert_eq!(centroid_classify(&fv(vec![5.0, 5.0]), &m).unwrap(), "Walk");
    }

    #[test]
    fn tie_goes_to_lexicographically_first() {
        let m = model(&[("b", vec![1.0]), ("a", vec![-1.0])]);
        assert_eq!(centroid_classify(&fv(vec![0.0]), &m).unwrap(), "a");
    }

    #[test]
    fn layout_mismatch() {
        let m = model(&[("a", vec![1.0])]);
        let bad = FeatureVector {
            layout: FeatureLayout::AccelerometerGyroscope,
            values: vec![0.0; 86],
        };
        assert!(matches!(centroid_classify(&bad, &m), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn fit_and_classify_three_blobs() {
        let centers = [("a", [0.0, 0.0]), ("b", [10.0, 0.0]), ("c", [0.0, 10.0])];
        let mut examples = Vec::new();
        for (name, [x, y]) in centers {
            for k in 0..20 {
                let dx = ((k * 7919) % 13) as f64 / 13.0 - 0.5;
                let dy = ((k * 104729) % 11) as f64 / 11.0 - 0.5;
                examples.push((name.to_string(), fv(vec![x + dx, y + dy])));
            }
        }
        let m = fit_centroids(&examples, true).unwrap();
        let correct = examples
            .iter()
            .filter(|(l, f)| &centroid_classify(f, &m).unwrap() == l)
            .count();
        assert!(correct as f64 / examples.len() as f64 >= 0.99);
        let back = CentroidModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
