use serde::Serialize;

use super::model::Provenance;

/// A named model with its expected trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GalleryEntry {
    pub spec: &'static str,
    /// Expected `tau_omega(T^p)`; `None` for nonmeasurable models.
    pub target: Option<f64>,
    /// Attainable Dixmier-trace values when the model is not measurable.
    pub range: Option<(f64, f64)>,
    pub p: f64,
    pub provenance: Provenance,
    pub measurable: bool,
    /// Eigenvalues differ from singular values.
    pub has_eigenvalues: bool,
    pub note: &'static str,
}

const fn entry(spec: &'static str, target: f64, p: f64, provenance: Provenance, note: &'static str) -> GalleryEntry {
    GalleryEntry {
        spec,
        target: Some(target),
        range: None,
        p,
        provenance,
        measurable: true,
        has_eigenvalues: false,
        note,
    }
}

/// The model gallery.
pub fn gallery() -> Vec<GalleryEntry> {
    use Provenance::*;
    vec![
        entry("harmonic", 1.0, 1.0, Exact, "mu_n = 1/n, H_N = log N + gamma + O(1/N)"),
        entry("harmonic:c=2", 2.0, 1.0, Exact, "homogeneity"),
        entry("power:p=2", 1.0, 2.0, Exact, "mu_n^2 = 1/n, trace of T^2"),
        entry("geom:r=0.5", 0.0, 1.0, Exact, "trace class, every Dixmier trace vanishes"),
        GalleryEntry {
            spec: "osc:a=0.15,b=4",
            target: None,
            range: Some((0.85, 1.15)),
            p: 1.0,
            provenance: Oracle,
            measurable: false,
            has_eigenvalues: false,
            note: "Cesaro profile 1 + a sin(b log log(t+e)) has lim inf 1-a and lim sup 1+a",
        },
        entry("circle:R=1000000", 2.0, 1.0, Literature, "Dirac operator on the circle, residue constant"),
        entry("torus:n=2,R=2000", std::f64::consts::PI, 1.0, Literature, "Laplacian on the 2-torus, unit-disc area"),
        GalleryEntry {
            has_eigenvalues: true,
            ..entry("alt-osc:a=0.15,b=4", 0.0, 1.0, Literature, "eigenvalues +mu_k, -mu_k cancel in pairs")
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::make_model;

    #[test]
    fn cheap_entries_parse_with_matching_targets() {
        for e in gallery().iter().filter(|e| !e.spec.starts_with("circle") && !e.spec.starts_with("torus")) {
            let m = make_model(e.spec).unwrap();
            assert_eq!(m.target.map(|t| t.value), e.target, "{}", e.spec);
        }
    }
}
