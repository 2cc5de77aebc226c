//! Simulated device description.
//!
//! Profiles can be loaded from a flat `key=value` file:
//!
//! ```text
//! # comments and blank lines are ignored
//! sm_count=13
//! segment_bytes=128
//! bw_copy=172.44
//! bw_scale=172.33
//! bw_add=175.24
//! bw_triad=175.24
//! b_max=208
//! ```
//!
//! `segment_bytes` defaults to 128 and `b_max` is optional.

use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT_BYTES: usize = 128;

/// Sustained bandwidth in GB/s of the four STREAM operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamBandwidth {
    pub copy: f64,
    pub scale: f64,
    pub add: f64,
    pub triad: f64,
}

impl StreamBandwidth {
    pub fn best(&self) -> f64 {
        self.copy.max(self.scale).max(self.add).max(self.triad)
    }

    fn all(&self) -> [f64; 4] {
        [self.copy, self.scale, self.add, self.triad]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub name: String,
    pub sm_count: usize,
    pub segment_bytes: usize,
    pub bandwidth: StreamBandwidth,
    /// Theoretical peak bandwidth in GB/s, when known.
    pub b_max_theoretical: Option<f64>,
}

impl DeviceProfile {
    pub fn new(
        name: impl Into<String>,
        sm_count: usize,
        segment_bytes: usize,
        bandwidth: StreamBandwidth,
        b_max_theoretical: Option<f64>,
    ) -> Result<Self> {
        let profile = Self {
            name: name.into(),
            sm_count,
            segment_bytes,
            bandwidth,
            b_max_theoretical,
        };
        profile.validate()?;
        Ok(profile)
    }

    fn validate(&self) -> Result<()> {
        if self.sm_count == 0 {
            return Err(Error::InvalidProfile("sm_count must be positive".into()));
        }
        if self.segment_bytes == 0 {
            return Err(Error::InvalidProfile("segment_bytes must be positive".into()));
        }
        if self.bandwidth.all().iter().any(|bw| !(bw.is_finite() && *bw > 0.0)) {
            return Err(Error::InvalidProfile("all bandwidths must be positive".into()));
        }
        if let Some(peak) = self.b_max_theoretical {
            if !(peak.is_finite() && peak > 0.0) {
                return Err(Error::InvalidProfile("b_max must be positive".into()));
            }
            if self.bandwidth.best() > peak {
                return Err(Error::InvalidProfile(format!(
                    "sustained bandwidth {} exceeds theoretical {peak}",
                    self.bandwidth.best()
                )));
            }
        }
        Ok(())
    }

    /// Sustained peak bandwidth: the best of the four STREAM figures.
    pub fn sustained_bandwidth(&self) -> f64 {
        self.bandwidth.best()
    }

    /// Same device with every bandwidth multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let b = self.bandwidth;
        Self {
            name: format!("{}x{factor}", self.name),
            bandwidth: StreamBandwidth {
                copy: b.copy * factor,
                scale: b.scale * factor,
                add: b.add * factor,
                triad: b.triad * factor,
            },
            b_max_theoretical: self.b_max_theoretical.map(|p| p * factor),
            ..self.clone()
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::ProfileParse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut sm_count = None;
        let mut segment_bytes = DEFAULT_SEGMENT_BYTES;
        let (mut copy, mut scale, mut add, mut triad) = (None, None, None, None);
        let mut b_max = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let float = || {
                value
                    .parse::<f64>()
                    .map_err(|e| err(lineno, format!("{key}: {e}")))
            };
            let int = || {
                value
                    .parse::<usize>()
                    .map_err(|e| err(lineno, format!("{key}: {e}")))
            };
            match key {
                "sm_count" => sm_count = Some(int()?),
                "segment_bytes" => segment_bytes = int()?,
                "bw_copy" => copy = Some(float()?),
                "bw_scale" => scale = Some(float()?),
                "bw_add" => add = Some(float()?),
                "bw_triad" => triad = Some(float()?),
                "b_max" => b_max = Some(float()?),
                other => return Err(err(lineno, format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| err(0, format!("missing key `{k}`"));
        let bandwidth = StreamBandwidth {
            copy: copy.ok_or_else(|| missing("bw_copy"))?,
            scale: scale.ok_or_else(|| missing("bw_scale"))?,
            add: add.ok_or_else(|| missing("bw_add"))?,
            triad: triad.ok_or_else(|| missing("bw_triad"))?,
        };
        let name = origin
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::new(
            name,
            sm_count.ok_or_else(|| missing("sm_count"))?,
            segment_bytes,
            bandwidth,
            b_max,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn to_kv_string(&self) -> String {
        let b = self.bandwidth;
        let mut s = format!(
            "sm_count={}\nsegment_bytes={}\nbw_copy={}\nbw_scale={}\nbw_add={}\nbw_triad={}\n",
            self.sm_count, self.segment_bytes, b.copy, b.scale, b.add, b.triad
        );
        if let Some(p) = self.b_max_theoretical {
            s.push_str(&format!("b_max={p}\n"));
        }
        s
    }
}

/// Theoretical peak of a DDR bus: clock (GHz) x bus width (bytes) x 2.
pub fn ddr_peak_bandwidth(memory_clock_ghz: f64, bus_width_bits: u32) -> f64 {
    memory_clock_ghz * (bus_width_bits as f64 / 8.0) * 2.0
}

/// Kepler K20c with ECC disabled (the default profile).
pub fn builtin_k20c_profile() -> DeviceProfile {
    DeviceProfile {
        name: "k20c".into(),
        sm_count: 13,
        segment_bytes: DEFAULT_SEGMENT_BYTES,
        bandwidth: StreamBandwidth {
            copy: 172.44,
            scale: 172.33,
            add: 175.24,
            triad: 175.24,
        },
        b_max_theoretical: Some(ddr_peak_bandwidth(2.6, 320)),
    }
}

/// K20c with ECC enabled.
pub fn builtin_k20c_ecc_profile() -> DeviceProfile {
    DeviceProfile {
        name: "k20c-ecc".into(),
        bandwidth: StreamBandwidth {
            copy: 148.99,
            scale: 150.64,
            add: 149.99,
            triad: 150.09,
        },
        ..builtin_k20c_profile()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k20c_numbers() {
        let p = builtin_k20c_profile();
        assert_eq!(p.bandwidth.triad, 175.24);
        assert_eq!(p.sm_count, 13);
        assert_eq!(p.segment_bytes, 128);
        assert!((p.b_max_theoretical.unwrap() - 208.0).abs() < 1e-9);
        assert_eq!(p.sustained_bandwidth(), 175.24);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn ecc_profile_peak() {
        assert_eq!(builtin_k20c_ecc_profile().sustained_bandwidth(), 150.64);
    }

    #[test]
    fn kv_round_trip() {
        let p = builtin_k20c_profile();
        let q = DeviceProfile::parse(&p.to_kv_string(), Path::new("k20c.txt")).unwrap();
        assert_eq!(q.bandwidth, p.bandwidth);
        assert_eq!(q.sm_count, 13);
        assert_eq!(q.b_max_theoretical, p.b_max_theoretical);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "sm_count=4\n# ok\nbw_copy=oops\n";
        match DeviceProfile::parse(text, Path::new("x")) {
            Err(Error::ProfileParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(DeviceProfile::parse("sm_count=4\n", Path::new("x")).is_err());
        assert!(DeviceProfile::parse("colour=blue\n", Path::new("x")).is_err());
    }

    #[test]
    fn rejects_sustained_above_theoretical() {
        let text = "sm_count=2\nbw_copy=1\nbw_scale=1\nbw_add=1\nbw_triad=300\nb_max=208\n";
        assert!(matches!(
            DeviceProfile::parse(text, Path::new("x")),
            Err(Error::InvalidProfile(_))
        ));
        let text = "sm_count=2\nbw_copy=0\nbw_scale=1\nbw_add=1\nbw_triad=1\n";
        assert!(DeviceProfile::parse(text, Path::new("x")).is_err());
    }
}
