use crate::model::{VnfCatalog, VnfType};

/// The off-the-shelf VNF table of the evaluation, CPU only.
pub fn default_catalog() -> VnfCatalog {
    VnfCatalog::new()
        .with(
            "firewall",
            vec![
                VnfType::new("level-1", 100, &[("cpu", 1.0)]),
                VnfType::new("level-5", 200, &[("cpu", 2.0)]),
                VnfType::new("level-10", 400, &[("cpu", 4.0)]),
            ],
        )
        .with("ids", vec![VnfType::new("bro", 80, &[("cpu", 1.0)])])
        .with(
            "ipsec",
            vec![VnfType::new("vsr1001", 268, &[("cpu", 1.0)]), VnfType::new("vsr1004", 580, &[("cpu", 4.0)])],
        )
        .with(
            "wan-opt",
            vec![VnfType::new("ccx770m", 10, &[("cpu", 2.0)]), VnfType::new("ccx1555m", 50, &[("cpu", 4.0)])],
        )
}

/// `Len-1` to `Len-4`: each chain extends the previous one.
pub fn chain_template(len: usize) -> Option<Vec<String>> {
    const ORDER: [&str; 4] = ["firewall", "ids", "ipsec", "wan-opt"];
    (1..=ORDER.len()).contains(&len).then(|| ORDER[..len].iter().map(|s| s.to_string()).collect())
}
