//! Compiling phenotypes into pipeline specifications and running them.
//!
//! A phenotype is scanned left to right. `preprocessing:<name>` and
//! `classifier:<name>` tokens open a component; every following
//! `<param>:<value>` token belongs to the most recently opened one.

mod registry;

use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cancel::CancelToken;
use crate::dsge::Phenotype;
use crate::ml::{Classifier, Dataset, FitContext, FitError, Labelled, Matrix, Transformer};

pub use registry::{Component, ComponentDef, DuplicateComponent, ParamDef, ParamKind, Registry};

/// A typed parameter value. In JSON, `None` is `null` and the rest map to
/// the natural JSON type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl ParamValue {
    pub fn text(s: impl Into<String>) -> Self {
        ParamValue::Text(s.into())
    }

    /// Phenotype value syntax: `None`, `True` and `False` first, then an
    /// integer, then a float, otherwise text.
    pub fn parse(s: &str) -> Self {
        match s {
            "None" => return ParamValue::None,
            "True" => return ParamValue::Bool(true),
            "False" => return ParamValue::Bool(false),
            _ => {}
        }
        if let Ok(i) = s.parse::<i64>() {
            return ParamValue::Int(i);
        }
        if let Ok(f) = s.parse::<f64>() {
            return ParamValue::Float(f);
        }
        ParamValue::Text(s.to_string())
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::None => f.write_str("None"),
            ParamValue::Bool(true) => f.write_str("True"),
            ParamValue::Bool(false) => f.write_str("False"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v:?}"),
            ParamValue::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Preprocessing,
    Classifier,
}

impl Role {
    pub fn tag(self) -> &'static str {
        match self {
            Role::Preprocessing => "preprocessing",
            Role::Classifier => "classifier",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "preprocessing" => Some(Role::Preprocessing),
            "classifier" => Some(Role::Classifier),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Ordered parameter list; serialized as a JSON object in this order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params(pub Vec<(String, ParamValue)>);

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Params {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ParamsVisitor;
        impl<'de> Visitor<'de> for ParamsVisitor {
            type Value = Params;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a parameter object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Params, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry()? {
                    out.push((k, v));
                }
                Ok(Params(out))
            }
        }
        deserializer.deserialize_map(ParamsVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub role: Role,
    pub name: String,
    pub params: Params,
}

impl ComponentSpec {
    pub fn param(&self, name: &str) -> Option<&ParamValue> {
        self.params.0.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    fn push_tokens(&self, out: &mut Vec<String>) {
        out.push(format!("{}:{}", self.role.tag(), self.name));
        for (k, v) in &self.params.0 {
            out.push(format!("{k}:{v}"));
        }
    }
}

/// Zero or more preprocessors followed by exactly one classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub preprocessors: Vec<ComponentSpec>,
    pub classifier: ComponentSpec,
}

impl PipelineSpec {
    /// Serializes back to phenotype tokens, parameters included in
    /// canonical order.
    pub fn render(&self) -> Phenotype {
        let mut tokens = Vec::new();
        for p in &self.preprocessors {
            p.push_tokens(&mut tokens);
        }
        self.classifier.push_tokens(&mut tokens);
        Phenotype::new(tokens)
    }

    pub fn components(&self) -> impl Iterator<Item = &ComponentSpec> {
        self.preprocessors.iter().chain(std::iter::once(&self.classifier))
    }
}

impl fmt::Display for PipelineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.render(), f)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("token `{0}` is not of the form tag:value")]
    MalformedToken(String),
    #[error("parameter token `{0}` appears before any component")]
    ParamBeforeComponent(String),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("`{name}` is a {actual} component but was tagged as {tagged}")]
    RoleMismatch { name: String, tagged: Role, actual: Role },
    #[error("component `{component}` has no parameter `{param}`")]
    UnknownParam { component: String, param: String },
    #[error("parameter `{param}` given twice for `{component}`")]
    DuplicateParam { component: String, param: String },
    #[error("invalid value `{value}` for `{component}.{param}`: expected {expected}")]
    InvalidValue { component: String, param: String, value: String, expected: String },
    #[error("pipeline has no classifier")]
    MissingClassifier,
    #[error("pipeline has more than one classifier")]
    MultipleClassifiers,
    #[error("preprocessor `{0}` follows the classifier")]
    PreprocessorAfterClassifier(String),
}

struct Open<'r> {
    def: &'r ComponentDef,
    given: Vec<(String, ParamValue)>,
}

impl Open<'_> {
    fn finish(self) -> ComponentSpec {
        let params = self
            .def
            .params
            .iter()
            .map(|p| {
                let value = self.given.iter().find(|(k, _)| *k == p.name).map_or(&p.default, |(_, v)| v);
                (p.name.clone(), value.clone())
            })
            .collect();
        ComponentSpec { role: self.def.role, name: self.def.name.clone(), params: Params(params) }
    }
}

/// Builds a validated [`PipelineSpec`] from phenotype tokens. Omitted
/// parameters take their registry defaults; out-of-range values are errors.
pub fn compile(phenotype: &Phenotype, registry: &Registry) -> Result<PipelineSpec, CompileError> {
    let mut preprocessors = Vec::new();
    let mut classifier: Option<ComponentSpec> = None;
    let mut open: Option<Open<'_>> = None;

    let mut close = |open: Option<Open<'_>>, classifier: &mut Option<ComponentSpec>| -> Result<(), CompileError> {
        if let Some(o) = open {
            let spec = o.finish();
            match spec.role {
                Role::Preprocessing if classifier.is_some() => {
                    return Err(CompileError::PreprocessorAfterClassifier(spec.name));
                }
                Role::Preprocessing => preprocessors.push(spec),
                Role::Classifier if classifier.is_some() => return Err(CompileError::MultipleClassifiers),
                Role::Classifier => *classifier = Some(spec),
            }
        }
        Ok(())
    };

    for token in phenotype.tokens() {
        let (key, value) = token.split_once(':').ok_or_else(|| CompileError::MalformedToken(token.clone()))?;
        if let Some(role) = Role::from_tag(key) {
            close(open.take(), &mut classifier)?;
            let def = registry.get(value).ok_or_else(|| CompileError::UnknownComponent(value.to_string()))?;
            if def.role != role {
                return Err(CompileError::RoleMismatch { name: value.to_string(), tagged: role, actual: def.role });
            }
            open = Some(Open { def, given: Vec::new() });
            continue;
        }
        let current = open.as_mut().ok_or_else(|| CompileError::ParamBeforeComponent(token.clone()))?;
        let component = current.def.name.clone();
        let param = current
            .def
            .param(key)
            .ok_or_else(|| CompileError::UnknownParam { component: component.clone(), param: key.to_string() })?;
        if current.given.iter().any(|(k, _)| k == key) {
            return Err(CompileError::DuplicateParam { component, param: key.to_string() });
        }
        let parsed = param.kind.accept(&ParamValue::parse(value)).ok_or_else(|| CompileError::InvalidValue {
            component,
            param: key.to_string(),
            value: value.to_string(),
            expected: param.kind.to_string(),
        })?;
        current.given.push((key.to_string(), parsed));
    }
    close(open.take(), &mut classifier)?;
    let classifier = classifier.ok_or(CompileError::MissingClassifier)?;
    Ok(PipelineSpec { preprocessors, classifier })
}

/// Failure while fitting or applying a pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("cancelled")]
    Timeout,
    #[error("{0}")]
    Resource(String),
}

impl From<FitError> for PipelineError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::Cancelled => PipelineError::Timeout,
            FitError::Numerical(m) => PipelineError::Resource(m),
        }
    }
}

/// A pipeline whose components have all been fitted.
pub struct FittedPipeline {
    spec: PipelineSpec,
    transformers: Vec<Box<dyn Transformer>>,
    classifier: Box<dyn Classifier>,
}

impl fmt::Debug for FittedPipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FittedPipeline").field("spec", &self.spec).finish_non_exhaustive()
    }
}

fn component_seed(seed: u64, position: usize) -> u64 {
    seed ^ (position as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn reject_missing(x: &Matrix, component: &str) -> Result<(), PipelineError> {
    if x.has_missing() {
        return Err(PipelineError::Resource(format!("missing values reach `{component}`, which does not accept them")));
    }
    Ok(())
}

impl FittedPipeline {
    /// Fits each preprocessor on the progressively transformed training data,
    /// then the classifier on the final representation.
    pub fn fit(
        spec: &PipelineSpec,
        registry: &Registry,
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        ctx: FitContext<'_>,
    ) -> Result<Self, PipelineError> {
        let mut current = x.clone();
        let mut transformers = Vec::with_capacity(spec.preprocessors.len());
        for (position, p) in spec.preprocessors.iter().enumerate() {
            ctx.cancel.check().map_err(FitError::from)?;
            let mut t = match build(p, registry)? {
                Component::Transformer(t) => t,
                Component::Classifier(_) => return Err(role_error(p)),
            };
            if !t.accepts_missing() {
                reject_missing(&current, &p.name)?;
            }
            let sub = FitContext::new(ctx.cancel, component_seed(ctx.seed, position));
            t.fit(Labelled { x: &current, y, n_classes }, sub)?;
            current = t.transform(&current)?;
            if current.cols() == 0 {
                return Err(PipelineError::Resource(format!("`{}` removed every feature", p.name)));
            }
            transformers.push(t);
        }
        ctx.cancel.check().map_err(FitError::from)?;
        let mut classifier = match build(&spec.classifier, registry)? {
            Component::Classifier(c) => c,
            Component::Transformer(_) => return Err(role_error(&spec.classifier)),
        };
        reject_missing(&current, &spec.classifier.name)?;
        let sub = FitContext::new(ctx.cancel, component_seed(ctx.seed, spec.preprocessors.len()));
        classifier.fit(Labelled { x: &current, y, n_classes }, sub)?;
        Ok(Self { spec: spec.clone(), transformers, classifier })
    }

    pub fn predict(&self, x: &Matrix, cancel: &CancelToken) -> Result<Vec<usize>, PipelineError> {
        let mut current = x.clone();
        for (t, p) in self.transformers.iter().zip(&self.spec.preprocessors) {
            cancel.check().map_err(FitError::from)?;
            if !t.accepts_missing() {
                reject_missing(&current, &p.name)?;
            }
            current = t.transform(&current)?;
        }
        reject_missing(&current, &self.spec.classifier.name)?;
        Ok(self.classifier.predict(&current, cancel)?)
    }

    pub fn spec(&self) -> &PipelineSpec {
        &self.spec
    }
}

fn build(spec: &ComponentSpec, registry: &Registry) -> Result<Component, PipelineError> {
    registry
        .get(&spec.name)
        .map(|def| def.build(spec))
        .ok_or_else(|| PipelineError::Resource(format!("component `{}` is not registered", spec.name)))
}

fn role_error(spec: &ComponentSpec) -> PipelineError {
    PipelineError::Resource(format!("component `{}` does not have role {}", spec.name, spec.role))
}

/// Fits on `train` and predicts the rows of `test`.
pub fn fit_predict(
    spec: &PipelineSpec,
    registry: &Registry,
    train: &Dataset,
    test: &Dataset,
    ctx: FitContext<'_>,
) -> Result<Vec<usize>, PipelineError> {
    if train.features().cols() != test.features().cols() {
        return Err(PipelineError::Resource("train and test feature counts differ".into()));
    }
    let fitted = FittedPipeline::fit(spec, registry, train.features(), train.labels(), train.n_classes(), ctx)?;
    fitted.predict(test.features(), ctx.cancel)
}
