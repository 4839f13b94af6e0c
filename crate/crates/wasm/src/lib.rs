//! Browser bindings. Every entry point takes JSON documents as strings and
//! returns a JSON string, so the page needs no generated type bindings.

use adverify_core::decision::gsharp;
use adverify_core::document::{run_property, PropertyDocument, RunOptions};
use adverify_core::enumerator::enumerate_regions;
use adverify_core::propagation::{propagate_ibp, propagate_symbolic};
use adverify_core::verifier::covering_level;
use adverify_core::{Interval, Network};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn load(
    network: &str,
    property: &str,
) -> Result<(Network, adverify_core::document::Property), String> {
    let net = Network::from_json(network).map_err(|e| format!("network: {e}"))?;
    let prop = PropertyDocument::from_json(property)
        .and_then(|d| d.resolve(&net))
        .map_err(|e| format!("property: {e}"))?;
    Ok((net, prop))
}

fn pairs(v: &[Interval]) -> Vec<[f64; 2]> {
    v.iter().map(|i| [i.lo(), i.hi()]).collect()
}

#[derive(Serialize)]
struct Bounds {
    widened: Vec<[f64; 2]>,
    interval: Vec<[f64; 2]>,
    symbolic: Vec<[f64; 2]>,
    /// Affine form of each output where the network is linear on the box.
    forms: Vec<Option<String>>,
    candidates: Vec<String>,
    level: String,
    level_members: Vec<String>,
}

/// Output bounds of the widened input box, the surviving classes and the
/// covering hierarchy level.
pub fn bounds_json(network: &str, property: &str) -> Result<String, String> {
    let (net, prop) = load(network, property)?;
    let widened = prop
        .perturbation
        .widen(&prop.domain)
        .map_err(|e| e.to_string())?;
    let ibp = propagate_ibp(&net, &widened).map_err(|e| e.to_string())?;
    let sym = propagate_symbolic(&net, &widened).map_err(|e| e.to_string())?;
    let h = &prop.hierarchy;
    let level = covering_level(&net, h, &widened).map_err(|e| e.to_string())?;
    let out = Bounds {
        widened: pairs(widened.dims()),
        interval: pairs(ibp.outputs()),
        symbolic: pairs(sym.reach.outputs()),
        forms: sym
            .forms
            .iter()
            .map(|f| f.as_ref().map(ToString::to_string))
            .collect(),
        candidates: gsharp(&sym.reach)
            .indices()
            .iter()
            .map(|c| h.label_of(c).to_string())
            .collect(),
        level: h.level(level).name.clone(),
        level_members: h
            .level(level)
            .members
            .iter()
            .map(|c| h.label_of(c).to_string())
            .collect(),
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

/// Runs the property in the mode its document names and returns the report.
pub fn verify_json(network: &str, property: &str, seed: u64) -> Result<String, String> {
    let (net, prop) = load(network, property)?;
    let opts = RunOptions {
        seed,
        ..RunOptions::default()
    };
    let out = run_property(&net, &prop, &opts).map_err(|e| e.to_string())?;
    Ok(out.report.to_json())
}

#[derive(Serialize)]
struct MapRegion {
    lower: [f64; 2],
    upper: [f64; 2],
    level: usize,
    resolved: bool,
}

#[derive(Serialize)]
struct MapLevel {
    name: String,
    members: Vec<String>,
    safe: bool,
}

#[derive(Serialize)]
struct RegionMapView {
    /// Indices of the two input dimensions drawn on the plane.
    axes: [usize; 2],
    domain: [[f64; 2]; 2],
    levels: Vec<MapLevel>,
    regions: Vec<MapRegion>,
}

/// Region map of a two-dimensional slice. The widened domain may have at
/// most two nondegenerate dimensions; `min_width` overrides the property.
pub fn region_map_json(network: &str, property: &str, min_width: f64) -> Result<String, String> {
    let (net, prop) = load(network, property)?;
    let widened = prop
        .perturbation
        .widen(&prop.domain)
        .map_err(|e| e.to_string())?;
    let free: Vec<usize> = (0..widened.len())
        .filter(|&i| !widened.dim(i).is_degenerate())
        .collect();
    if free.len() > 2 {
        return Err(format!(
            "the region map draws two dimensions; fix all but two inputs (found {} free)",
            free.len()
        ));
    }
    let axes = match free.as_slice() {
        [a, b] => [*a, *b],
        [a] => [*a, if *a == 0 { widened.len().min(2) - 1 } else { 0 }],
        _ => [0, widened.len().min(2) - 1],
    };
    let h = &prop.hierarchy;
    let width = if min_width > 0.0 {
        min_width
    } else {
        prop.enumerate.min_width
    };
    let map = enumerate_regions(&net, h, &widened, width).map_err(|e| e.to_string())?;
    let view = RegionMapView {
        axes,
        domain: axes.map(|a| [widened.dim(a).lo(), widened.dim(a).hi()]),
        levels: h
            .levels()
            .iter()
            .enumerate()
            .map(|(i, l)| MapLevel {
                name: l.name.clone(),
                members: l
                    .members
                    .iter()
                    .map(|c| h.label_of(c).to_string())
                    .collect(),
                safe: h.is_within_safe(adverify_core::LevelId(i)),
            })
            .collect(),
        regions: map
            .regions
            .iter()
            .map(|r| MapRegion {
                lower: axes.map(|a| r.bx.dim(a).lo()),
                upper: axes.map(|a| r.bx.dim(a).hi()),
                level: r.level.0,
                resolved: r.resolved,
            })
            .collect(),
    };
    Ok(serde_json::to_string(&view).expect("serializable"))
}

#[wasm_bindgen]
pub fn bounds(network: &str, property: &str) -> Result<String, JsValue> {
    bounds_json(network, property).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn verify(network: &str, property: &str, seed: u32) -> Result<String, JsValue> {
    verify_json(network, property, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn region_map(network: &str, property: &str, min_width: f64) -> Result<String, JsValue> {
    region_map_json(network, property, min_width).map_err(|e| JsValue::from_str(&e))
}
