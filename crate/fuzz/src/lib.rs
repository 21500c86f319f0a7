//! Checks shared by the fuzz targets and the corpus replay test. Each takes
//! raw bytes, must never panic on bad input, and asserts the invariants that
//! hold whenever parsing succeeds.

use coded_inference::config::{parse_config, parse_gamma_grid, Overrides, MAX_GRID_POINTS};
use coded_inference::oracle::{
    decode_outputs, encode_model, feasible, mds_generator, GaloisField, GfMatrix,
};
use coded_inference::{Error, Schedule};

/// Upper bound on input size; larger inputs are skipped.
const MAX_INPUT: usize = 1 << 16;

pub fn config_json(data: &[u8]) {
    if data.len() > MAX_INPUT {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    match parse_config(Some(text), &Overrides::default()) {
        Ok(c) => {
            assert!(c.rows_per_node() * c.nodes() >= c.rows());
            assert!(c.rows_per_node() >= 1 && c.rows_per_node() <= c.rows());
            assert!(c.tau() > 0.0 && c.eta() > 0.0 && c.gamma() >= 0.0);
        }
        Err(Error::Config(problems)) => assert!(!problems.is_empty()),
        Err(e) => panic!("unexpected error kind: {e}"),
    }
}

pub fn gamma_grid(data: &[u8]) {
    if data.len() > 256 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = parse_gamma_grid(text) {
        assert!(!grid.is_empty() && grid.len() <= MAX_GRID_POINTS);
        assert!(grid.iter().all(|g| g.is_finite() && *g >= 0.0));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }
}

pub fn schedule_json(data: &[u8]) {
    if data.len() > MAX_INPUT {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = Schedule::from_json(text) {
        let again = Schedule::from_json(&s.to_json()).expect("round trip");
        assert_eq!(again, s);
        for node in s.nodes() {
            let mut rows = node.clone();
            rows.sort_unstable();
            rows.dedup();
            assert_eq!(rows.len(), node.len());
        }
    }
}

/// Byte layout: `m`, extra coded rows, output columns, then computed row
/// indices and matrix entries drawn from the remaining bytes.
pub fn gf_decode(data: &[u8]) {
    let [a, b, c, rest @ ..] = data else {
        return;
    };
    let field = GaloisField::new(8).expect("GF(256)");
    let m = 1 + (*a as usize % 8);
    let mprime = m + (*b as usize % 9);
    let n = 1 + (*c as usize % 3);
    let take = m + (rest.first().copied().unwrap_or(0) as usize % (mprime - m + 1));
    let mut bytes = rest.iter().skip(1).copied().cycle();
    if rest.len() < 2 {
        return;
    }
    let computed: Vec<usize> = (0..take)
        .map(|_| bytes.next().unwrap() as usize % mprime)
        .collect();
    let w = GfMatrix::from_fn(m, 2, |_, _| bytes.next().unwrap() as u16);
    let x = GfMatrix::from_fn(2, n, |_, _| bytes.next().unwrap() as u16);

    let g = mds_generator(&field, mprime, m).expect("mprime <= 256");
    let ivs = encode_model(&field, &g, &w)
        .and_then(|coded| coded.select_rows(&computed))
        .and_then(|rows| rows.mul(&field, &x))
        .expect("shapes agree");
    let mut distinct = computed.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let decoded = decode_outputs(&field, &g, &computed, &ivs);
    // Vandermonde rows at distinct points: any m distinct rows suffice
    assert_eq!(feasible(&field, &computed, &g), distinct.len() >= m);
    match decoded {
        Ok(y) => assert_eq!(y, w.mul(&field, &x).expect("shapes agree")),
        Err(Error::Singular { rank, needed }) => {
            assert!(distinct.len() < m);
            assert!(rank < needed);
        }
        Err(e) => panic!("unexpected error: {e}"),
    }
}
