//! Browser bindings. Every method returns a JSON string for the page script.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use mesrnn::data::{generate, Scenario, SynthSpec};
use mesrnn::eval::{evaluate, Trajectories};
use mesrnn::model::{ModelDims, Variant};
use mesrnn::stgraph::{build_graph, metapaths, GraphConfig, MetaPathKind, Scene};
use mesrnn::training::{train_with, TrainConfig};

/// Widths small enough to train in a page in a few seconds.
const DEMO_DIMS: ModelDims = ModelDims {
    edge_embed: 16,
    edge_hidden: 32,
    node_embed: 32,
    node_hidden: 64,
};

#[wasm_bindgen]
pub struct Demo {
    spec: SynthSpec,
    scene: Scene,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Demo {
        let spec = synth_spec("crossing", 4, 1, 0).expect("default spec is valid");
        let scene = generate(&spec).expect("default spec generates").remove(0);
        Demo { spec, scene }
    }

    /// Replace the current scene. Returns `{scenario, peds: [{id, track}]}`.
    pub fn generate(&mut self, scenario: &str, peds: usize, seed: u32) -> Result<String, JsError> {
        self.try_generate(scenario, peds, seed).map_err(|e| JsError::new(&e))
    }

    /// Meta-path instances of every kind anchored at `(anchor, step)`.
    pub fn metapaths(&self, anchor: usize, step: usize) -> Result<String, JsError> {
        self.try_metapaths(anchor, step).map_err(|e| JsError::new(&e))
    }

    /// Train `variant` on fresh scenes of the current scenario, then roll it
    /// out on the current scene.
    pub fn train_and_predict(&self, variant: &str, scenes: usize, epochs: usize) -> Result<String, JsError> {
        self.try_train_and_predict(variant, scenes, epochs).map_err(|e| JsError::new(&e))
    }
}

impl Default for Demo {
    fn default() -> Self {
        Self::new()
    }
}

fn synth_spec(scenario: &str, peds: usize, scenes: usize, seed: u64) -> Result<SynthSpec, String> {
    let scenario: Scenario = scenario.parse().map_err(|e: mesrnn::data::DataError| e.to_string())?;
    let spec = SynthSpec {
        peds,
        scenes,
        seed,
        ..SynthSpec::new(scenario)
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn track_json(scene: &Scene, p: usize) -> Value {
    let track: Vec<Value> = scene.tracks()[p].iter().map(|q| q.map_or(Value::Null, |q| json!(q))).collect();
    json!({ "id": scene.ped_ids()[p], "track": track })
}

fn trajectories_json(t: &Trajectories) -> Value {
    let peds: Vec<Value> = (0..t.ped_ids.len())
        .map(|p| {
            json!({
                "id": t.ped_ids[p],
                "observed": t.observed[p],
                "truth": t.truth[p],
                "predicted": t.predicted[p],
            })
        })
        .collect();
    json!(peds)
}

impl Demo {
    pub fn try_generate(&mut self, scenario: &str, peds: usize, seed: u32) -> Result<String, String> {
        let spec = synth_spec(scenario, peds, 1, u64::from(seed))?;
        self.scene = generate(&spec).map_err(|e| e.to_string())?.remove(0);
        self.spec = spec;
        Ok(self.scene_json().to_string())
    }

    pub fn scene_json(&self) -> Value {
        let peds: Vec<Value> = (0..self.scene.num_peds()).map(|p| track_json(&self.scene, p)).collect();
        json!({ "scenario": self.spec.scenario.name(), "steps": self.scene.len(), "peds": peds })
    }

    pub fn try_metapaths(&self, anchor: usize, step: usize) -> Result<String, String> {
        let graph = build_graph(&self.scene, self.scene.len(), &GraphConfig::default()).map_err(|e| e.to_string())?;
        let mut kinds = serde_json::Map::new();
        for kind in MetaPathKind::ALL {
            let found = metapaths(&graph, anchor, step, kind).map_err(|e| e.to_string())?;
            let items: Vec<Value> = found.iter().map(|f| json!({ "walk": f.walk(), "value": f.value })).collect();
            kinds.insert(kind.to_string(), json!(items));
        }
        Ok(json!({ "anchor": anchor, "step": step, "kinds": kinds }).to_string())
    }

    pub fn try_train_and_predict(&self, variant: &str, scenes: usize, epochs: usize) -> Result<String, String> {
        let variant: Variant = variant.parse().map_err(|e: mesrnn::model::ModelError| e.to_string())?;
        let spec = SynthSpec {
            scenes: scenes.max(2),
            seed: self.spec.seed.wrapping_add(1),
            ..self.spec
        };
        let corpus = generate(&spec).map_err(|e| e.to_string())?;
        let config = TrainConfig {
            epochs: epochs.max(1),
            dropout: 0.0,
            val_fraction: 0.0,
            seed: self.spec.seed,
            dims: DEMO_DIMS,
            ..TrainConfig::default()
        };
        let mut losses = Vec::new();
        let outcome = train_with(&config, &corpus, variant, |r| losses.push(r.train_loss)).map_err(|e| e.to_string())?;
        let result = evaluate(&outcome.checkpoint, std::slice::from_ref(&self.scene), "demo").map_err(|e| e.to_string())?;
        Ok(json!({
            "variant": variant.as_str(),
            "losses": losses,
            "ade": result.row.ade_world,
            "fde": result.row.fde_world,
            "obs": config.obs,
            "peds": trajectories_json(&result.scenes[0]),
        })
        .to_string())
    }
}
