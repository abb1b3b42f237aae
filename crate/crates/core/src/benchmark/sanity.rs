use std::path::Path;

use crate::benchmark::method::MethodSpec;
use crate::benchmark::planted::{generate_planted, PlantedSpec};
use crate::cover::nmi;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SanityReport {
    pub nmi: f64,
    pub detected: usize,
    pub planted: usize,
}

impl SanityReport {
    /// Detected communities per planted group.
    pub fn ratio(&self) -> f64 {
        self.detected as f64 / self.planted as f64
    }
}

/// Runs `method` on a planted graph and scores it against the planted
/// groups. Overlapping output is flattened first (see
/// [`Cover::flatten`](crate::detectors::Cover::flatten)); the count is of
/// the cover's communities.
pub fn sanity_check(method: &MethodSpec, spec: &PlantedSpec) -> Result<SanityReport> {
    let planted = generate_planted(spec)?;
    let cover = method.detect(&planted.graph, "planted", Path::new("."), spec.seed)?;
    if cover.is_empty() {
        return Err(Error::Empty(format!("{} found no communities", method.name)));
    }
    let flat = cover.flatten(spec.n)?;
    Ok(SanityReport {
        nmi: nmi(&flat, &planted.groups)?,
        detected: cover.len(),
        planted: spec.groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::Partition;

    #[test]
    fn louvain_recovers_clean_groups() {
        let m = MethodSpec::parse("l", "louvain", &[]).unwrap();
        let r = sanity_check(&m, &PlantedSpec::new(40, 4, 1.0, 0.0, 3)).unwrap();
        assert_eq!(r.nmi, 1.0);
        assert_eq!(r.ratio(), 1.0);
    }

    #[test]
    fn empty_cover_is_an_error() {
        // a perfect matching has no 3-edge cluster
        let m = MethodSpec::parse("lc", "linkcluster", &["threshold=100"]).unwrap();
        let spec = PlantedSpec::new(8, 4, 1.0, 0.0, 0);
        assert!(matches!(sanity_check(&m, &spec), Err(Error::Empty(_))));
    }

    #[test]
    fn singletons_score_low() {
        // the confusion-matrix value for singletons against 4 groups of 8
        let truth = Partition::from_assignment(&(0..32).map(|v| v / 8).collect::<Vec<_>>());
        let s = nmi(&Partition::singletons(32), &truth).unwrap();
        let expected = 2.0 * 4f64.ln() / (32f64.ln() + 4f64.ln());
        assert!((s - expected).abs() < 1e-12);
    }
}
