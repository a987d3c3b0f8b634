//! Lattice mini-language.
//!
//! ```text
//! chain:N:open:aligned | chain:N:open:anti | chain:N:ring
//! three-link-pair
//! honeycomb:R:C
//! c3ring:N
//! heavy-hex-star
//! file:PATH        (lattice JSON)
//! ```

use vbsprep::lattice::{
    build_chain, build_coordination3_ring, build_honeycomb_patch, build_three_link_pair, heavy_hex_star_layout,
    ChainBoundary, Lattice,
};
use vbsprep::{Result, VbsError};

fn bad(spec: &str, why: &str) -> VbsError {
    VbsError::InvalidLattice(format!("`{spec}`: {why}"))
}

fn count(spec: &str, field: &str) -> Result<usize> {
    field
        .parse()
        .map_err(|_| bad(spec, &format!("`{field}` is not a site count")))
}

pub fn parse_lattice(spec: &str) -> Result<Lattice> {
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)?;
        return Lattice::from_json(&text).map_err(|e| match e {
            VbsError::Json(j) => bad(spec, &j.to_string()),
            other => other,
        });
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["chain", n, "open", "aligned"] => build_chain(count(spec, n)?, ChainBoundary::ALIGNED),
        ["chain", n, "open", "anti"] => build_chain(count(spec, n)?, ChainBoundary::ANTI_ALIGNED),
        ["chain", n, "ring"] => build_chain(count(spec, n)?, ChainBoundary::Ring),
        ["chain", ..] => Err(bad(spec, "expected chain:N:open:aligned, chain:N:open:anti or chain:N:ring")),
        ["three-link-pair"] => build_three_link_pair(),
        ["honeycomb", r, c] => build_honeycomb_patch(count(spec, r)?, count(spec, c)?),
        ["c3ring", n] => build_coordination3_ring(count(spec, n)?),
        ["heavy-hex-star"] => Ok(heavy_hex_star_layout()?.lattice),
        _ => Err(bad(spec, "unknown lattice")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains() {
        let l = parse_lattice("chain:4:open:aligned").unwrap();
        assert_eq!(l.n_sites(), 4);
        assert_eq!(l.links().len(), 3);
        assert_eq!(parse_lattice("chain:5:ring").unwrap().links().len(), 5);
        assert_eq!(parse_lattice("chain:3:open:anti").unwrap().name(), "chain:3:open:anti");
    }

    #[test]
    fn named() {
        assert_eq!(parse_lattice("three-link-pair").unwrap().total_data_qubits(), 6);
        assert_eq!(parse_lattice("c3ring:4").unwrap().n_sites(), 4);
        assert_eq!(parse_lattice("heavy-hex-star").unwrap().n_sites(), 4);
        assert!(parse_lattice("honeycomb:1:1").unwrap().n_sites() >= 6);
    }

    #[test]
    fn rejects() {
        for s in ["chain:x:ring", "chain:4:open", "chain:1:ring", "square:3", "", "honeycomb:0:2"] {
            assert!(matches!(parse_lattice(s), Err(VbsError::InvalidLattice(_))), "{s}");
        }
        assert!(matches!(parse_lattice("file:/nonexistent/lat.json"), Err(VbsError::Io(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.json");
        let l = parse_lattice("c3ring:4").unwrap();
        std::fs::write(&p, l.to_json().unwrap()).unwrap();
        let back = parse_lattice(&format!("file:{}", p.display())).unwrap();
        assert_eq!(back.descriptor(), l.descriptor());
    }
}
