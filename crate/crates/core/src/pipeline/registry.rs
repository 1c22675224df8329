use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::ml::classifiers::{
    Criterion, DecisionTree, GaussianNb, Knn, KnnWeights, LogisticRegression, NearestCentroid, Perceptron, RandomForest,
};
use crate::ml::preprocess::{
    ImputeStrategy, Imputer, MaxAbsScaler, MinMaxScaler, SelectPercentile, StandardScaler, VarianceThreshold,
};
use crate::ml::{Classifier, Transformer};

use super::{ComponentSpec, ParamValue, Role};

/// Accepted values for one parameter. Ranges are inclusive.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    Int {
        min: i64,
        max: i64,
    },
    Float {
        min: f64,
        max: f64,
    },
    /// `None` or an integer in range.
    OptionalInt {
        min: i64,
        max: i64,
    },
    Choice(Vec<String>),
    Bool,
}

impl ParamKind {
    pub fn choice<I, S>(options: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ParamKind::Choice(options.into_iter().map(Into::into).collect())
    }

    /// Checks `value` against this kind and returns its canonical form
    /// (integers given for float parameters become floats).
    pub fn accept(&self, value: &ParamValue) -> Option<ParamValue> {
        match (self, value) {
            (ParamKind::Int { min, max }, ParamValue::Int(v)) if min <= v && v <= max => Some(value.clone()),
            (ParamKind::Float { min, max }, ParamValue::Float(v)) if *min <= *v && *v <= *max => Some(value.clone()),
            (ParamKind::Float { min, max }, ParamValue::Int(v)) if *min <= *v as f64 && *v as f64 <= *max => {
                Some(ParamValue::Float(*v as f64))
            }
            (ParamKind::OptionalInt { .. }, ParamValue::None) => Some(ParamValue::None),
            (ParamKind::OptionalInt { min, max }, ParamValue::Int(v)) if min <= v && v <= max => Some(value.clone()),
            (ParamKind::Choice(options), ParamValue::Text(t)) if options.contains(t) => Some(value.clone()),
            (ParamKind::Bool, ParamValue::Bool(_)) => Some(value.clone()),
            _ => None,
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamKind::Int { min, max } => write!(f, "integer in [{min}, {max}]"),
            ParamKind::Float { min, max } => write!(f, "number in [{min:?}, {max:?}]"),
            ParamKind::OptionalInt { min, max } => write!(f, "None or integer in [{min}, {max}]"),
            ParamKind::Choice(options) => write!(f, "one of {}", options.join(", ")),
            ParamKind::Bool => f.write_str("True or False"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDef {
    pub name: String,
    pub kind: ParamKind,
    pub default: ParamValue,
}

impl ParamDef {
    pub fn new(name: impl Into<String>, kind: ParamKind, default: ParamValue) -> Self {
        Self { name: name.into(), kind, default }
    }
}

/// An unfitted component built from a validated spec.
pub enum Component {
    Transformer(Box<dyn Transformer>),
    Classifier(Box<dyn Classifier>),
}

type Build = dyn Fn(&ComponentSpec) -> Component + Send + Sync;

/// A registry entry: role, parameter schema and constructor.
#[derive(Clone)]
pub struct ComponentDef {
    pub name: String,
    pub role: Role,
    pub params: Vec<ParamDef>,
    build: Arc<Build>,
}

impl ComponentDef {
    /// `build` receives a spec whose params are complete and validated
    /// against `params`, in the declared order.
    pub fn new(
        name: impl Into<String>,
        role: Role,
        params: Vec<ParamDef>,
        build: impl Fn(&ComponentSpec) -> Component + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), role, params, build: Arc::new(build) }
    }

    pub fn build(&self, spec: &ComponentSpec) -> Component {
        (self.build)(spec)
    }

    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }
}

impl fmt::Debug for ComponentDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComponentDef")
            .field("name", &self.name)
            .field("role", &self.role)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("component `{0}` is already registered")]
pub struct DuplicateComponent(pub String);

/// Maps component names to their definitions.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    defs: Vec<ComponentDef>,
    index: HashMap<String, usize>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn register(&mut self, def: ComponentDef) -> Result<(), DuplicateComponent> {
        if self.index.contains_key(&def.name) {
            return Err(DuplicateComponent(def.name));
        }
        self.index.insert(def.name.clone(), self.defs.len());
        self.defs.push(def);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ComponentDef> {
        self.index.get(name).map(|&i| &self.defs[i])
    }

    pub fn components(&self) -> impl Iterator<Item = &ComponentDef> {
        self.defs.iter()
    }

    /// The built-in preprocessors and classifiers.
    pub fn standard() -> Self {
        let mut r = Registry::empty();
        for def in standard_defs() {
            r.register(def).expect("standard names are unique");
        }
        r
    }
}

fn int(spec: &ComponentSpec, name: &str) -> i64 {
    match spec.param(name) {
        Some(ParamValue::Int(v)) => *v,
        other => panic!("{}: expected integer `{name}`, found {other:?}", spec.name),
    }
}

fn float(spec: &ComponentSpec, name: &str) -> f64 {
    match spec.param(name) {
        Some(ParamValue::Float(v)) => *v,
        other => panic!("{}: expected number `{name}`, found {other:?}", spec.name),
    }
}

fn text<'a>(spec: &'a ComponentSpec, name: &str) -> &'a str {
    match spec.param(name) {
        Some(ParamValue::Text(v)) => v,
        other => panic!("{}: expected text `{name}`, found {other:?}", spec.name),
    }
}

fn optional_depth(spec: &ComponentSpec, name: &str) -> Option<usize> {
    match spec.param(name) {
        Some(ParamValue::None) => None,
        Some(ParamValue::Int(v)) => Some(*v as usize),
        other => panic!("{}: expected None or integer `{name}`, found {other:?}", spec.name),
    }
}

fn criterion(spec: &ComponentSpec) -> Criterion {
    if text(spec, "criterion") == "entropy" {
        Criterion::Entropy
    } else {
        Criterion::Gini
    }
}

fn standard_defs() -> Vec<ComponentDef> {
    use ParamValue as V;
    let p_param = || ParamDef::new("p", ParamKind::Int { min: 1, max: 2 }, V::Int(2));
    let criterion_param = || ParamDef::new("criterion", ParamKind::choice(["gini", "entropy"]), V::text("gini"));
    let depth_param = || ParamDef::new("max_depth", ParamKind::OptionalInt { min: 1, max: 50 }, V::None);
    let transformer = |t: Box<dyn Transformer>| Component::Transformer(t);
    let classifier = |c: Box<dyn Classifier>| Component::Classifier(c);
    vec![
        ComponentDef::new(
            "imputer",
            Role::Preprocessing,
            vec![ParamDef::new("strategy", ParamKind::choice(["mean", "median", "most_frequent"]), V::text("mean"))],
            move |s| {
                let strategy = match text(s, "strategy") {
                    "median" => ImputeStrategy::Median,
                    "most_frequent" => ImputeStrategy::MostFrequent,
                    _ => ImputeStrategy::Mean,
                };
                transformer(Box::new(Imputer::new(strategy)))
            },
        ),
        ComponentDef::new("min_max_scaler", Role::Preprocessing, vec![], move |_| {
            transformer(Box::<MinMaxScaler>::default())
        }),
        ComponentDef::new("standard_scaler", Role::Preprocessing, vec![], move |_| {
            transformer(Box::<StandardScaler>::default())
        }),
        ComponentDef::new("max_abs_scaler", Role::Preprocessing, vec![], move |_| {
            transformer(Box::<MaxAbsScaler>::default())
        }),
        ComponentDef::new(
            "variance_threshold",
            Role::Preprocessing,
            vec![ParamDef::new("threshold", ParamKind::Float { min: 0.0, max: f64::MAX }, V::Float(0.0))],
            move |s| transformer(Box::new(VarianceThreshold::new(float(s, "threshold")))),
        ),
        ComponentDef::new(
            "select_percentile",
            Role::Preprocessing,
            vec![ParamDef::new("percentile", ParamKind::Int { min: 1, max: 100 }, V::Int(10))],
            move |s| transformer(Box::new(SelectPercentile::new(int(s, "percentile") as f64))),
        ),
        ComponentDef::new(
            "knn",
            Role::Classifier,
            vec![
                ParamDef::new("n_neighbors", ParamKind::Int { min: 1, max: 100 }, V::Int(5)),
                ParamDef::new("weights", ParamKind::choice(["uniform", "distance"]), V::text("uniform")),
                p_param(),
            ],
            move |s| {
                let weights = if text(s, "weights") == "distance" { KnnWeights::Distance } else { KnnWeights::Uniform };
                classifier(Box::new(Knn::new(int(s, "n_neighbors") as usize, weights, int(s, "p") as u32)))
            },
        ),
        ComponentDef::new("nearest_centroid", Role::Classifier, vec![p_param()], move |s| {
            classifier(Box::new(NearestCentroid::new(int(s, "p") as u32)))
        }),
        ComponentDef::new(
            "gaussian_nb",
            Role::Classifier,
            vec![ParamDef::new("var_smoothing", ParamKind::Float { min: 0.0, max: 1.0 }, V::Float(1e-9))],
            move |s| classifier(Box::new(GaussianNb::new(float(s, "var_smoothing")))),
        ),
        ComponentDef::new(
            "decision_tree",
            Role::Classifier,
            vec![
                criterion_param(),
                depth_param(),
                ParamDef::new("min_samples_leaf", ParamKind::Int { min: 1, max: 100 }, V::Int(1)),
            ],
            move |s| {
                classifier(Box::new(DecisionTree::new(
                    criterion(s),
                    optional_depth(s, "max_depth"),
                    int(s, "min_samples_leaf") as usize,
                )))
            },
        ),
        ComponentDef::new(
            "logistic_regression",
            Role::Classifier,
            vec![
                ParamDef::new("alpha", ParamKind::Float { min: 0.0, max: 10.0 }, V::Float(1e-4)),
                ParamDef::new("max_iter", ParamKind::Int { min: 1, max: 10_000 }, V::Int(100)),
                ParamDef::new("learning_rate", ParamKind::Float { min: 1e-6, max: 10.0 }, V::Float(0.1)),
            ],
            move |s| {
                classifier(Box::new(LogisticRegression::new(
                    float(s, "alpha"),
                    int(s, "max_iter") as usize,
                    float(s, "learning_rate"),
                )))
            },
        ),
        ComponentDef::new(
            "perceptron",
            Role::Classifier,
            vec![
                ParamDef::new("epochs", ParamKind::Int { min: 1, max: 1000 }, V::Int(20)),
                ParamDef::new("eta0", ParamKind::Float { min: 1e-6, max: 10.0 }, V::Float(1.0)),
            ],
            move |s| classifier(Box::new(Perceptron::new(int(s, "epochs") as usize, float(s, "eta0")))),
        ),
        ComponentDef::new(
            "random_forest",
            Role::Classifier,
            vec![
                criterion_param(),
                depth_param(),
                ParamDef::new("n_estimators", ParamKind::Int { min: 1, max: 500 }, V::Int(100)),
                ParamDef::new("min_weight_fraction_leaf", ParamKind::Float { min: 0.0, max: 0.5 }, V::Float(0.0)),
            ],
            move |s| {
                classifier(Box::new(RandomForest::new(
                    criterion(s),
                    optional_depth(s, "max_depth"),
                    int(s, "n_estimators") as usize,
                    float(s, "min_weight_fraction_leaf"),
                )))
            },
        ),
    ]
}
