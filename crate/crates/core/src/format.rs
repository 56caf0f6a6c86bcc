//! JSON file formats for channels and factorized distributions.
//!
//! Channel: `{"input_alphabet": n, "output_alphabet": m, "rows": [[...], ...]}`
//!
//! Distribution: `{"p_ux": [[...]], "channel": <channel>, "p_z_given_uy": [[...]]}`
//! where `p_ux` has one row per u and `p_z_given_uy` row `u * |Y| + y`.

use serde::{Deserialize, Serialize};

use crate::channel::Dmc;
use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, JointPmf};
use crate::region::DiamondDistribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub input_alphabet: usize,
    pub output_alphabet: usize,
    pub rows: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidChannel(format!("malformed channel file: {e}")))
    }

    pub fn to_dmc(&self) -> Result<Dmc<f64>> {
        if self.rows.len() != self.input_alphabet {
            return Err(Error::InvalidChannel(format!(
                "input_alphabet is {} but {} rows were given",
                self.input_alphabet,
                self.rows.len()
            )));
        }
        if let Some((i, r)) = self
            .rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.output_alphabet)
        {
            return Err(Error::InvalidChannel(format!(
                "row {i} has {} entries but output_alphabet is {}",
                r.len(),
                self.output_alphabet
            )));
        }
        Dmc::from_matrix(self.rows.clone())
    }

    pub fn from_dmc(dmc: &Dmc<f64>) -> Self {
        Self {
            input_alphabet: dmc.input_alphabet(),
            output_alphabet: dmc.output_alphabet(),
            rows: dmc
                .transition()
                .rows()
                .iter()
                .map(|r| r.probs().to_vec())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub p_ux: Vec<Vec<f64>>,
    pub channel: ChannelFile,
    pub p_z_given_uy: Vec<Vec<f64>>,
}

impl DistributionFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidDistribution(format!("malformed distribution file: {e}")))
    }

    pub fn to_distribution(&self) -> Result<DiamondDistribution<f64>> {
        let channel = self.channel.to_dmc()?;
        let card_u = self.p_ux.len();
        let card_x = self.p_ux.first().map_or(0, Vec::len);
        if card_u == 0 || card_x == 0 {
            return Err(Error::InvalidDistribution("p_ux is empty".into()));
        }
        if self.p_ux.iter().any(|r| r.len() != card_x) {
            return Err(Error::InvalidDistribution("p_ux rows are ragged".into()));
        }
        let p_ux = JointPmf::new(vec![card_u, card_x], self.p_ux.concat())?;
        let p_z = ConditionalKernel::new(self.p_z_given_uy.clone())?;
        DiamondDistribution::new(p_ux, channel, p_z)
    }

    pub fn from_distribution(dist: &DiamondDistribution<f64>) -> Self {
        Self {
            p_ux: dist
                .p_ux()
                .probs()
                .chunks(dist.card_x())
                .map(<[f64]>::to_vec)
                .collect(),
            channel: ChannelFile::from_dmc(dist.channel()),
            p_z_given_uy: dist
                .p_z_given_uy()
                .rows()
                .iter()
                .map(|r| r.probs().to_vec())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BSC: &str = r#"{"input_alphabet": 2, "output_alphabet": 2,
        "rows": [[0.889972, 0.110028], [0.110028, 0.889972]]}"#;

    #[test]
    fn parses_channel() {
        let dmc = ChannelFile::from_json(BSC).unwrap().to_dmc().unwrap();
        assert_eq!(dmc.prob(1, 0), 0.110028);
    }

    #[test]
    fn channel_errors() {
        let short =
            r#"{"input_alphabet": 2, "output_alphabet": 2, "rows": [[1.0, 0.0], [0.0, 0.9]]}"#;
        let err = ChannelFile::from_json(short).unwrap().to_dmc();
        assert!(matches!(err, Err(Error::InvalidChannel(_))));

        let mismatch = r#"{"input_alphabet": 3, "output_alphabet": 2, "rows": [[1.0, 0.0]]}"#;
        assert!(ChannelFile::from_json(mismatch).unwrap().to_dmc().is_err());
        assert!(ChannelFile::from_json("{\"rows\": 3}").is_err());
    }

    #[test]
    fn parses_distribution() {
        let text = format!(
            r#"{{"p_ux": [[0.5, 0.0], [0.0, 0.5]], "channel": {BSC},
               "p_z_given_uy": [[1.0], [1.0], [1.0], [1.0]]}}"#
        );
        let file = DistributionFile::from_json(&text).unwrap();
        let dist = file.to_distribution().unwrap();
        assert_eq!((dist.card_u(), dist.card_x(), dist.card_z()), (2, 2, 1));
        assert_eq!(DistributionFile::from_distribution(&dist), file);
    }

    #[test]
    fn distribution_errors() {
        let text = format!(
            r#"{{"p_ux": [[0.5, 0.0], [0.0, 0.5]], "channel": {BSC},
               "p_z_given_uy": [[1.0], [1.0]]}}"#
        );
        let err = DistributionFile::from_json(&text)
            .unwrap()
            .to_distribution();
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
