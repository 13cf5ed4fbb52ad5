use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// What is needed to reproduce an output. With timing disabled, two runs under the same
/// manifest in single-threaded mode write byte-identical files.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub tool_version: &'static str,
    /// sha256 of the model/config file, when one was read
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
    pub grids: Vec<String>,
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub outputs: Vec<String>,
}

pub struct Recorder {
    start: Instant,
    timing: bool,
    manifest: RunManifest,
}

impl Recorder {
    pub fn new(argv: Vec<String>, threads: usize, timing: bool) -> Self {
        Recorder {
            start: Instant::now(),
            timing,
            manifest: RunManifest {
                command_line: argv,
                tool_version: env!("CARGO_PKG_VERSION"),
                config_sha256: None,
                grids: Vec::new(),
                threads,
                wall_time_s: None,
                outputs: Vec::new(),
            },
        }
    }

    pub fn config(&mut self, bytes: &[u8]) {
        self.manifest.config_sha256 = Some(hex(&Sha256::digest(bytes)));
    }

    pub fn grid(&mut self, g: impl ToString) {
        self.manifest.grids.push(g.to_string());
    }

    pub fn output(&mut self, o: impl ToString) {
        self.manifest.outputs.push(o.to_string());
    }

    pub fn finish(mut self) -> RunManifest {
        if self.timing {
            self.manifest.wall_time_s = Some(self.start.elapsed().as_secs_f64());
        }
        self.manifest
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        let mut r = Recorder::new(vec!["realbloch".into()], 1, false);
        r.config(b"abc");
        let m = r.finish();
        assert_eq!(
            m.config_sha256.as_deref(),
            Some("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")
        );
        assert!(m.wall_time_s.is_none());
    }
}
