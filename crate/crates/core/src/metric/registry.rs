use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{make_perturbed, model_metric, BumpRegistry, ConformalMetric, ModelKind};
use crate::error::{Error, Result};

/// Everything needed to construct a metric by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: String,
    pub delta: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_bump")]
    pub bump: String,
}

fn default_bump() -> String {
    "gaussian".to_string()
}

impl MetricSpec {
    pub fn model(kind: ModelKind, kappa: f64, delta: f64) -> Self {
        let kind = match kind {
            ModelKind::Flat => "flat",
            ModelKind::Sphere => "sphere",
            ModelKind::Hyperbolic => "hyperbolic",
        };
        Self { kind: kind.to_string(), delta, kappa, epsilon: 0.0, bump: default_bump() }
    }

    pub fn custom(delta: f64, epsilon: f64, bump: &str) -> Self {
        Self { kind: "custom".to_string(), delta, kappa: 0.0, epsilon, bump: bump.to_string() }
    }
}

pub type MetricFactory = fn(&MetricSpec, &BumpRegistry) -> Result<Arc<dyn ConformalMetric>>;

/// Metric constructors registered by name.
#[derive(Debug, Clone)]
pub struct MetricRegistry {
    factories: BTreeMap<String, MetricFactory>,
    bumps: BumpRegistry,
}

impl Default for MetricRegistry {
    fn default() -> Self {
        let mut r = Self { factories: BTreeMap::new(), bumps: BumpRegistry::default() };
        r.register("flat", |s, _| model_metric(ModelKind::Flat, 0.0, s.delta));
        r.register("sphere", |s, _| model_metric(ModelKind::Sphere, s.kappa, s.delta));
        r.register("hyperbolic", |s, _| model_metric(ModelKind::Hyperbolic, s.kappa, s.delta));
        r.register("custom", |s, bumps| make_perturbed(s.delta, s.epsilon, bumps.get(&s.bump)?));
        r
    }
}

impl MetricRegistry {
    pub fn register(&mut self, name: &str, factory: MetricFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn bumps(&self) -> &BumpRegistry {
        &self.bumps
    }

    pub fn bumps_mut(&mut self) -> &mut BumpRegistry {
        &mut self.bumps
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, spec: &MetricSpec) -> Result<Arc<dyn ConformalMetric>> {
        let factory = self.factories.get(&spec.kind).ok_or_else(|| Error::Unknown {
            what: "metric",
            name: spec.kind.clone(),
        })?;
        factory(spec, &self.bumps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricKind;

    #[test]
    fn builds_every_registered_kind() {
        let r = MetricRegistry::default();
        assert_eq!(r.names().collect::<Vec<_>>(), ["custom", "flat", "hyperbolic", "sphere"]);
        let s = r.build(&MetricSpec::model(ModelKind::Sphere, 1.0, 1.0)).unwrap();
        assert_eq!(s.kind(), MetricKind::Sphere { kappa: 1.0 });
        let c = r.build(&MetricSpec::custom(1.0, 0.1, "cosine")).unwrap();
        assert_eq!(c.kind(), MetricKind::Custom);
    }

    #[test]
    fn unknown_names_are_reported() {
        let r = MetricRegistry::default();
        let mut spec = MetricSpec::model(ModelKind::Flat, 0.0, 1.0);
        spec.kind = "torus".into();
        assert!(matches!(r.build(&spec), Err(Error::Unknown { .. })));
        assert!(r.build(&MetricSpec::custom(1.0, 0.1, "square")).is_err());
    }
}
