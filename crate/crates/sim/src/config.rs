//! Run configuration: a sectioned TOML file, overridden key by key by
//! command-line flags, resolved into a [`SweepSpec`].
//!
//! ```toml
//! [modem]
//! scheme = "hcm"        # hcm | dcr-hcm | interleaved-hcm | aco-ofdm
//! n = 128
//! m = 2
//! cp_len = 0
//!
//! [channel]
//! taps = [1.0]
//! noise_dbm = -20.0     # or "off"
//! p0 = 0.5
//!
//! [sweep]
//! power = "14:24:0.5"   # start:stop:step (inclusive) or a comma list
//! min_errors = 200
//! max_bits = 20000000
//! seed = 20170301
//! interleaver = "perm.txt"
//!
//! [run]
//! workers = 4
//! name = "hcm-ideal"
//! ```

use std::path::{Path, PathBuf};

use hcm_core::link::Scheme;
use serde::Deserialize;

use crate::sweep::{StopRule, SweepSpec, DEFAULT_P0, DEFAULT_SEED};

/// Noise level as written in a config file or on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Noise {
    Dbm(f64),
    Keyword(NoiseKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKeyword {
    Off,
}

impl Noise {
    pub fn parse(s: &str) -> Result<Noise, String> {
        if s.eq_ignore_ascii_case("off") {
            Ok(Noise::Keyword(NoiseKeyword::Off))
        } else {
            s.trim()
                .parse()
                .map(Noise::Dbm)
                .map_err(|_| format!("noise must be a dBm value or `off`, got `{s}`"))
        }
    }

    fn dbm(self) -> Option<f64> {
        match self {
            Noise::Dbm(v) => Some(v),
            Noise::Keyword(NoiseKeyword::Off) => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModemSection {
    pub scheme: Option<String>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub cp_len: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub taps: Option<Vec<f64>>,
    pub noise_dbm: Option<Noise>,
    pub p0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub power: Option<String>,
    pub min_errors: Option<u64>,
    pub max_bits: Option<u64>,
    pub seed: Option<u64>,
    pub interleaver: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub workers: Option<usize>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub modem: ModemSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub run: RunSection,
}

macro_rules! take {
    ($dst:expr, $src:expr) => {
        if $src.is_some() {
            $dst = $src;
        }
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads a config file; relative interleaver paths are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if let (Some(p), Some(dir)) = (&cfg.sweep.interleaver, path.parent()) {
            if p.is_relative() {
                cfg.sweep.interleaver = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    /// Keys set in `over` replace those in `self`.
    pub fn overlay(&mut self, over: RunConfig) {
        take!(self.modem.scheme, over.modem.scheme);
        take!(self.modem.n, over.modem.n);
        take!(self.modem.m, over.modem.m);
        take!(self.modem.cp_len, over.modem.cp_len);
        take!(self.channel.taps, over.channel.taps);
        take!(self.channel.noise_dbm, over.channel.noise_dbm);
        take!(self.channel.p0, over.channel.p0);
        take!(self.sweep.power, over.sweep.power);
        take!(self.sweep.min_errors, over.sweep.min_errors);
        take!(self.sweep.max_bits, over.sweep.max_bits);
        take!(self.sweep.seed, over.sweep.seed);
        take!(self.sweep.interleaver, over.sweep.interleaver);
        take!(self.run.workers, over.run.workers);
        take!(self.run.name, over.run.name);
    }

    /// Fills defaults and produces a spec. Configuration problems (missing
    /// keys, unreadable files, malformed values) are reported here; modem
    /// validity is checked later by [`SweepSpec::validate`].
    pub fn resolve(&self) -> Result<SweepSpec, String> {
        let scheme = match &self.modem.scheme {
            Some(s) => Scheme::parse(s).ok_or_else(|| format!("unknown scheme `{s}`"))?,
            None => Scheme::Hcm,
        };
        let default_m = if scheme == Scheme::AcoOfdm { 16 } else { 2 };
        let noise = self
            .channel
            .noise_dbm
            .ok_or("channel noise_dbm is required (a dBm value or \"off\")")?;
        let power = self.sweep.power.as_deref().ok_or("sweep power grid is required")?;
        let interleaver = match &self.sweep.interleaver {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                Some(crate::formats::parse_permutation(&text).map_err(|e| format!("{}: {e}", path.display()))?)
            }
            None => None,
        };
        let stop = StopRule {
            min_errors: self.sweep.min_errors.unwrap_or(StopRule::default().min_errors),
            max_bits: self.sweep.max_bits.unwrap_or(StopRule::default().max_bits),
        };
        Ok(SweepSpec {
            scheme,
            n: self.modem.n.unwrap_or(128),
            m: self.modem.m.unwrap_or(default_m),
            cp_len: self.modem.cp_len.unwrap_or(0),
            taps: self.channel.taps.clone().unwrap_or_else(|| vec![1.0]),
            noise_dbm: noise.dbm(),
            p0: self.channel.p0.unwrap_or(DEFAULT_P0),
            powers_dbm: parse_grid(power)?,
            stop,
            base_seed: self.sweep.seed.unwrap_or(DEFAULT_SEED),
            interleaver,
        })
    }
}

fn round_grid(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

/// `start:stop:step` (inclusive, values rounded to 1e-9) or `a,b,c`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| -> Result<f64, String> {
        let v: f64 = t.trim().parse().map_err(|_| format!("bad number `{t}` in power grid"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value `{t}` in power grid"))
        }
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("power grid `{s}` must be start:stop:step"));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(format!("power grid `{s}` needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 100_000 {
            return Err(format!("power grid `{s}` has too many points"));
        }
        Ok((0..count).map(|i| round_grid(start + i as f64 * step)).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("14:24:0.5").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 14.0);
        assert_eq!(g[20], 24.0);
        assert_eq!(g[3], 15.5);
        assert_eq!(parse_grid("0:1:0.1").unwrap()[3], 0.3);
        assert_eq!(parse_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_grid("5:5:1").unwrap(), vec![5.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn file_then_flags() {
        let mut cfg = RunConfig::from_toml(
            "[modem]\nscheme = \"aco-ofdm\"\n[channel]\nnoise_dbm = -30\n[sweep]\npower = \"0:2:1\"\nseed = 3\n",
        )
        .unwrap();
        let mut over = RunConfig::default();
        over.sweep.seed = Some(9);
        over.channel.noise_dbm = Some(Noise::parse("off").unwrap());
        cfg.overlay(over);
        let spec = cfg.resolve().unwrap();
        assert_eq!(spec.scheme, Scheme::AcoOfdm);
        assert_eq!(spec.m, 16);
        assert_eq!(spec.base_seed, 9);
        assert_eq!(spec.noise_dbm, None);
        assert_eq!(spec.powers_dbm, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn config_errors() {
        assert!(RunConfig::from_toml("[modem]\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml("[channel]\nnoise_dbm = \"loud\"\n").is_err());
        assert!(RunConfig::from_toml("[channel]\nnoise_dbm = \"off\"\n").is_ok());
        let cfg = RunConfig::from_toml("[sweep]\npower = \"1:2:1\"\n").unwrap();
        assert!(cfg.resolve().unwrap_err().contains("noise"));
        assert!(Noise::parse("-20").is_ok());
        assert!(Noise::parse("x").is_err());
    }
}
