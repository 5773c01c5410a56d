//! Browser bindings for the simulator. Each export takes plain arguments and
//! returns a JSON string; the page in `www/` renders it.

use certdel::bits;
use certdel::cc::{self, wire::Frame, CcParams, Finalized};
use certdel::harness::{self, ExperimentConfig};
use certdel::otske;
use certdel::primitives::SchemeId;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Trial cap for experiments started from the page.
pub const MAX_DEMO_TRIALS: u64 = 20_000;

fn parse_message(message: &str) -> Result<Vec<bool>, String> {
    let m = bits::parse_bits(message.trim()).map_err(|e| e.to_string())?;
    if m.is_empty() {
        return Err("message is empty".into());
    }
    Ok(m)
}

/// One-time BB84 encryption, then deletion and verification.
///
/// `flip` toggles one certificate bit before verification. After deleting,
/// the remnant is decrypted with the real key to show what is left.
pub fn bb84_round(message: &str, seed: u64, flip: Option<usize>) -> Result<serde_json::Value, String> {
    let m = parse_message(message)?;
    if m.len() > otske::MAX_MSG_BITS {
        return Err(format!("at most {} message bits", otske::MAX_MSG_BITS));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let key = otske::otske_keygen(m.len(), &mut rng).map_err(|e| e.to_string())?;
    let ct = otske::otske_enc(&key, &m).map_err(|e| e.to_string())?;
    let decrypted = otske::otske_dec(&key, ct.clone(), &mut rng).map_err(|e| e.to_string())?;
    let (mut cert, remnant) = otske::otske_del(ct, &mut rng).map_err(|e| e.to_string())?;
    if let Some(i) = flip {
        let bit = cert
            .bits
            .get_mut(i)
            .ok_or_else(|| format!("flip index {i} is out of range"))?;
        *bit = !*bit;
    }
    let accepted = otske::otske_vrfy(&key, &cert).map_err(|e| e.to_string())?;
    let after = otske::otske_dec(&key, remnant.into_remnant(), &mut rng).map_err(|e| e.to_string())?;
    Ok(json!({
        "theta": bits::format_bits(key.theta()),
        "r": bits::format_bits(key.r()),
        "message": bits::format_bits(&m),
        "decrypted": bits::format_bits(&decrypted),
        "certificate": bits::format_bits(&cert.bits),
        "hadamard_positions": key.hadamard_positions(),
        "accepted": accepted,
        "decrypted_after_deletion": bits::format_bits(&after),
        "forgery_probability": otske::forgery_probability(key.kappa(), key.msg_len()),
    }))
}

#[derive(Serialize)]
struct FrameSummary {
    kind: &'static str,
    type_byte: u8,
    bytes: usize,
}

/// Runs the interactive cc-pke-cd protocol step by step over in-memory
/// messages, then decrypts one copy and deletes another.
pub fn cc_session(n: usize, w: usize, message: &str, seed: u64) -> Result<serde_json::Value, String> {
    let m = parse_message(message)?;
    let params = CcParams {
        n,
        w,
        lambda: 128,
        msg_len: m.len(),
        scheme: SchemeId::TestStub,
    };
    params.validate().map_err(|e| e.to_string())?;
    let err = |e: cc::CcError| e.to_string();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keys = cc::cc_keygen(&params, &mut rng).map_err(err)?;
    let (mut sender, keys_msg) = cc::sender_init(&keys.pk, &m, &params, &mut rng).map_err(err)?;
    let (receiver, images) = cc::receiver_respond(&keys_msg, &mut rng).map_err(err)?;
    let mut frames = vec![Frame::Keys(keys_msg), Frame::Images(images.clone())];
    let finalized = cc::sender_finalize(&mut sender, &images, &mut rng).map_err(err)?;
    let subset = sender.subset().to_vec();
    let (vk, ct_msg) = match finalized {
        Finalized::Sent { vk, ct } => (vk, ct),
        Finalized::Aborted { reason } => return Err(format!("sender aborted: {reason}")),
    };
    frames.push(Frame::CtBundle(ct_msg.clone()));
    let ct = cc::receiver_complete(receiver, ct_msg).map_err(err)?;
    let decrypted = cc::cc_dec(&keys.sk, ct.clone(), &mut rng).map_err(err)?;
    let cert = cc::cc_del(ct, &mut rng).map_err(err)?;
    let accepted = cc::cc_vrfy(&vk, &cert).map_err(err)?;
    frames.push(Frame::Cert(cert.clone()));
    let summary: Vec<FrameSummary> = frames
        .iter()
        .map(|f| FrameSummary {
            kind: f.name(),
            type_byte: f.type_byte(),
            bytes: f.to_bytes().len(),
        })
        .collect();
    Ok(json!({
        "instances": params.instances(),
        "subset": subset,
        "images": images.ys,
        "frames": summary,
        "decrypted": bits::format_bits(&decrypted),
        "certificate": cert.entries.iter().map(|e| json!({"e": e.e, "d": e.d})).collect::<Vec<_>>(),
        "accepted": accepted,
        "honest_acceptance_probability": cc::honest_acceptance_probability(n, w),
    }))
}

/// Runs an experiment from a JSON config and returns the report.
pub fn experiment(config_json: &str) -> Result<serde_json::Value, String> {
    let config: ExperimentConfig = serde_json::from_str(config_json).map_err(|e| e.to_string())?;
    if config.trials > MAX_DEMO_TRIALS {
        return Err(format!("at most {MAX_DEMO_TRIALS} trials in the browser"));
    }
    let mut report = harness::run_experiment(&config).map_err(|e| e.to_string())?;
    // per-trial rows are not rendered
    report.outcomes.clear();
    serde_json::to_value(&report).map_err(|e| e.to_string())
}

fn to_js(r: Result<serde_json::Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = bb84Round)]
pub fn bb84_round_js(message: &str, seed: u64, flip: Option<usize>) -> Result<String, JsError> {
    to_js(bb84_round(message, seed, flip))
}

#[wasm_bindgen(js_name = ccSession)]
pub fn cc_session_js(n: usize, w: usize, message: &str, seed: u64) -> Result<String, JsError> {
    to_js(cc_session(n, w, message, seed))
}

#[wasm_bindgen(js_name = runExperiment)]
pub fn experiment_js(config_json: &str) -> Result<String, JsError> {
    to_js(experiment(config_json))
}
