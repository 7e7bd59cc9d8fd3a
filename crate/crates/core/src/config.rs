//! The problem config file: criteria, classifier and actionability rules.
//!
//! ```toml
//! [[criterion]]
//! name = "label_step"
//! kind = "label_abs_diff"
//! column = "digit"
//! aggregation = "max"
//!
//! [classifier]
//! kind = "label_column"
//! column = "digit"
//! positive = 8
//!
//! [actionability]
//! label_order = { column = "digit", order = "strictly_increasing" }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost::{CostSpec, Criterion};
use crate::data::{Classifier, Dataset};
use crate::error::{io_err, Result};
use crate::graph::{build_knn_graph, ActionPredicate, ActionabilityGraph, AuxScores, CostEvaluator, LabelOrderRule};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Actionability {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_order: Option<LabelOrderRule>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    criterion: Vec<Criterion>,
    pub classifier: Classifier,
    #[serde(default)]
    pub actionability: Actionability,
}

impl ProblemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ProblemConfig = toml::from_str(text)?;
        cfg.cost_spec()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        ProblemConfig::from_toml_str(&text)
    }

    pub fn cost_spec(&self) -> Result<CostSpec> {
        CostSpec::new(self.criterion.clone())
    }

    /// Standardizes the dataset if the schema flags any column and it has
    /// not been standardized yet.
    pub fn prepare(&self, data: &Dataset) -> Result<Dataset> {
        let flagged = data.schema().columns().iter().any(|c| c.standardize);
        if flagged && data.standardization().is_none() {
            data.standardize()
        } else {
            Ok(data.clone())
        }
    }

    /// KNN actionability graph over an already prepared dataset.
    pub fn build_graph(&self, data: &Dataset, k_neighbors: usize) -> Result<ActionabilityGraph> {
        let spec = self.cost_spec()?;
        let aux = AuxScores::compute(data, &spec)?;
        let eval = CostEvaluator::new(data, &spec, &aux)?;
        let predicate = ActionPredicate::from_dataset(data, &spec, self.actionability.label_order.as_ref())?;
        let positives = self.classifier.classify_all(data)?;
        build_knn_graph(data, k_neighbors, &predicate, &eval, &positives)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{load_csv_reader, FeatureSchema};
    use crate::graph::LabelOrder;

    const CFG: &str = r#"
        [[criterion]]
        name = "label_step"
        kind = "label_abs_diff"
        column = "digit"
        aggregation = "max"

        [[criterion]]
        name = "l2"
        kind = "lnorm"
        p = 2
        aggregation = "sum"

        [classifier]
        kind = "label_column"
        column = "digit"
        positive = 8

        [actionability]
        label_order = { column = "digit", order = "strictly_increasing" }
    "#;

    #[test]
    fn parses_and_builds() {
        let cfg = ProblemConfig::from_toml_str(CFG).unwrap();
        assert_eq!(cfg.cost_spec().unwrap().k(), 2);
        assert_eq!(cfg.actionability.label_order.as_ref().unwrap().order, LabelOrder::StrictlyIncreasing);
        let schema = FeatureSchema::from_toml_str(
            "[columns.x]\nrole = \"feature\"\nstandardize = true\n[columns.digit]\nrole = \"label\"\n",
        )
        .unwrap();
        let csv = "x,digit\n0,2\n1,3\n2,5\n3,8\n4,8\n";
        let data = cfg.prepare(&load_csv_reader(csv.as_bytes(), &schema).unwrap()).unwrap();
        assert!(data.standardization().is_some());
        let g = cfg.build_graph(&data, 2).unwrap();
        assert!(g.vertices()[3].positive && !g.vertices()[0].positive);
        assert!(g.is_dag());
    }

    #[test]
    fn classifier_is_required() {
        let text = "[[criterion]]\nname = \"a\"\nkind = \"lnorm\"\np = 1\naggregation = \"sum\"\n";
        assert!(ProblemConfig::from_toml_str(text).is_err());
    }
}
