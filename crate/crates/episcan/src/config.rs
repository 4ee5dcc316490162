//! Plain-text `key = value` config files for the simulator and the agent.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored, lists
//! are comma-separated. Unknown or duplicate keys are rejected so typos
//! fail loudly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::agent::{EncoderChoice, TrainConfig};
use crate::data::{Encoding, PenetranceModel};
use crate::error::{Error, Result};
use crate::num::Real;

struct KvMap {
    source: String,
    map: BTreeMap<String, String>,
}

impl KvMap {
    fn from_file(path: impl AsRef<Path>) -> Result<KvMap> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        KvMap::parse(&text, &path.display().to_string())
    }

    fn parse(text: &str, source: &str) -> Result<KvMap> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("{source}:{}: expected key = value", i + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::config(format!(
                    "{source}:{}: duplicate key {key:?}",
                    i + 1
                )));
            }
        }
        Ok(KvMap {
            source: source.to_string(),
            map,
        })
    }

    fn take_raw(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn take<V: FromStr>(&mut self, key: &str) -> Result<Option<V>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<V>().map(Some).map_err(|_| {
                Error::config(format!(
                    "{}: key {key:?}: cannot interpret value {raw:?}",
                    self.source
                ))
            }),
        }
    }

    fn take_list<V: FromStr>(&mut self, key: &str) -> Result<Option<Vec<V>>> {
        match self.take_raw(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|item| {
                    item.trim().parse::<V>().map_err(|_| {
                        Error::config(format!(
                            "{}: key {key:?}: cannot interpret list item {item:?}",
                            self.source
                        ))
                    })
                })
                .collect::<Result<Vec<V>>>()
                .map(Some),
        }
    }

    fn finish(self) -> Result<()> {
        if self.map.is_empty() {
            Ok(())
        } else {
            let keys: Vec<&str> = self.map.keys().map(|k| k.as_str()).collect();
            Err(Error::config(format!(
                "{}: unknown keys: {}",
                self.source,
                keys.join(", ")
            )))
        }
    }
}

/// Simulator settings: the disease model plus how many rows to draw.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub model: PenetranceModel,
    pub n_case: usize,
    pub n_control: usize,
}

/// Loads a simulator config.
///
/// Keys: `snps`, `interacting` (list of column indices), `maf` (list, one
/// per interacting SNP), `penetrance` (list of 3^k probabilities),
/// `background_maf`, `n_case`, `n_control`, `seed`, `rejection_budget`,
/// `heritability`, `prevalence`. The last two are descriptive metadata.
/// Defaults: 300 cases, 300 controls, background MAF 0.2, seed 0.
pub fn load_sim_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let mut kv = KvMap::from_file(path)?;
    let snps: usize = kv
        .take("snps")?
        .ok_or_else(|| Error::config("simulator config must set `snps`"))?;
    let interacting: Vec<usize> = kv
        .take_list("interacting")?
        .ok_or_else(|| Error::config("simulator config must set `interacting`"))?;
    let maf: Vec<f64> = kv
        .take_list("maf")?
        .ok_or_else(|| Error::config("simulator config must set `maf`"))?;
    let penetrance: Vec<f64> = kv
        .take_list("penetrance")?
        .ok_or_else(|| Error::config("simulator config must set `penetrance`"))?;
    if interacting.len() > snps {
        return Err(Error::config(format!(
            "{} interacting SNPs do not fit in {snps} columns",
            interacting.len()
        )));
    }
    let config = SimConfig {
        model: PenetranceModel {
            background_snps: snps - interacting.len(),
            interacting_snps: interacting,
            maf,
            penetrance,
            background_maf: kv.take("background_maf")?.unwrap_or(0.2),
            seed: kv.take("seed")?.unwrap_or(0),
            rejection_budget: kv.take("rejection_budget")?.unwrap_or(0),
            heritability: kv.take("heritability")?,
            prevalence: kv.take("prevalence")?,
        },
        n_case: kv.take("n_case")?.unwrap_or(300),
        n_control: kv.take("n_control")?.unwrap_or(300),
    };
    kv.finish()?;
    config.model.validate()?;
    Ok(config)
}

/// Loads a training config, starting from the defaults and overriding any
/// key that is present.
///
/// Keys: `batch_size`, `max_set_size`, `entropy_weight`, `learning_rate`,
/// `max_iterations`, `seed`, `encoder` (`identity` or `conv`),
/// `conv_width`, `conv_channels` (conv only), `encoding` (`raw_codes` or
/// `one_hot`), `hidden_policy`, `hidden_value`, `init_scale`, `beta1`,
/// `beta2`, `epsilon`, `resample_batch`, `report_top_k`.
pub fn load_train_config<T: Real>(path: impl AsRef<Path>) -> Result<TrainConfig<T>> {
    let mut kv = KvMap::from_file(path)?;
    let mut cfg = TrainConfig::<T>::default();
    if let Some(v) = kv.take("batch_size")? {
        cfg.batch_size = v;
    }
    if let Some(v) = kv.take("max_set_size")? {
        cfg.max_set_size = v;
    }
    if let Some(v) = kv.take::<f64>("entropy_weight")? {
        cfg.entropy_weight = T::of(v);
    }
    if let Some(v) = kv.take::<f64>("learning_rate")? {
        cfg.learning_rate = T::of(v);
    }
    if let Some(v) = kv.take("max_iterations")? {
        cfg.max_iterations = v;
    }
    if let Some(v) = kv.take("seed")? {
        cfg.seed = v;
    }
    if let Some(choice) = kv.take_raw("encoder") {
        cfg.encoder = match choice.as_str() {
            "identity" => EncoderChoice::Identity,
            "conv" => EncoderChoice::Conv {
                width: kv.take("conv_width")?.unwrap_or(5),
                channels: kv.take("conv_channels")?.unwrap_or(8),
            },
            other => {
                return Err(Error::config(format!(
                    "unknown encoder {other:?} (expected identity or conv)"
                )))
            }
        };
    }
    if let Some(v) = kv.take_raw("encoding") {
        cfg.encoding = v.parse::<Encoding>()?;
    }
    if let Some(v) = kv.take("hidden_policy")? {
        cfg.hidden_policy = v;
    }
    if let Some(v) = kv.take("hidden_value")? {
        cfg.hidden_value = v;
    }
    if let Some(v) = kv.take::<f64>("init_scale")? {
        cfg.init_scale = T::of(v);
    }
    if let Some(v) = kv.take::<f64>("beta1")? {
        cfg.beta1 = T::of(v);
    }
    if let Some(v) = kv.take::<f64>("beta2")? {
        cfg.beta2 = T::of(v);
    }
    if let Some(v) = kv.take::<f64>("epsilon")? {
        cfg.epsilon = T::of(v);
    }
    if let Some(v) = kv.take("resample_batch")? {
        cfg.resample_batch = v;
    }
    if let Some(v) = kv.take("report_top_k")? {
        cfg.report_top_k = v;
    }
    kv.finish()?;
    cfg.validate()?;
    Ok(cfg)
}
