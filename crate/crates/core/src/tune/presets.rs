//! Step-size grids from reference deep-learning tuning runs, kept
//! as read-only reference data. They are not geometric, so they are exposed
//! as plain slices rather than [`Grid`](super::Grid) values.

/// `(task/method, step sizes largest first)`.
const GRIDS: &[(&str, &[f64])] = &[
    ("cifar10/sgd", &[2.0, 1.0, 0.5, 0.25, 0.05, 0.01]),
    ("cifar10/hb", &[2.0, 1.0, 0.5, 0.25, 0.05, 0.01]),
    ("cifar10/adagrad", &[0.1, 0.05, 0.01, 0.0075, 0.005]),
    ("cifar10/rmsprop", &[0.005, 0.001, 0.0005, 0.0003, 0.0001]),
    (
        "cifar10/adam",
        &[0.005, 0.001, 0.0005, 0.0003, 0.0001, 0.00005],
    ),
    ("war_and_peace/sgd", &[2.0, 1.0, 0.5, 0.25, 0.125]),
    ("war_and_peace/hb", &[2.0, 1.0, 0.5, 0.25, 0.125]),
    ("war_and_peace/adagrad", &[0.4, 0.2, 0.1, 0.05, 0.025]),
    (
        "war_and_peace/rmsprop",
        &[0.02, 0.01, 0.005, 0.0025, 0.00125, 0.000625, 0.0005, 0.0001],
    ),
    (
        "war_and_peace/adam",
        &[0.005, 0.0025, 0.00125, 0.000625, 0.0003125, 0.00015625],
    ),
    ("disc_parsing/sgd", &[1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01]),
    (
        "disc_parsing/hb",
        &[1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002],
    ),
    (
        "disc_parsing/adagrad",
        &[
            1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 0.0005, 0.0002, 0.0001,
        ],
    ),
    (
        "disc_parsing/adam",
        &[0.01, 0.005, 0.002, 0.001, 0.0005, 0.0002, 0.0001],
    ),
    ("gen_parsing/sgd", &[1.0, 0.5, 0.25, 0.1, 0.05, 0.025, 0.01]),
    (
        "gen_parsing/hb",
        &[0.25, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001],
    ),
    (
        "gen_parsing/adagrad",
        &[5.0, 2.5, 1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01],
    ),
    (
        "gen_parsing/rmsprop",
        &[
            0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 0.0005, 0.0002, 0.0001,
        ],
    ),
    // the source list repeats 0.001; kept once
    ("gen_parsing/adam", &[0.005, 0.001, 0.0005, 0.0002, 0.0001]),
];

/// Preset grid by `task/method` name, e.g. `cifar10/sgd`.
pub fn reference_grid(name: &str) -> Option<&'static [f64]> {
    GRIDS.iter().find(|(n, _)| *n == name).map(|(_, g)| *g)
}

pub fn reference_grid_names() -> impl Iterator<Item = &'static str> {
    GRIDS.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cifar_sgd_grid() {
        assert_eq!(
            reference_grid("cifar10/sgd").unwrap(),
            &[2.0, 1.0, 0.5, 0.25, 0.05, 0.01]
        );
        assert!(reference_grid("disc_parsing/rmsprop").is_none());
    }

    #[test]
    fn every_preset_is_strictly_decreasing() {
        for name in reference_grid_names() {
            let g = reference_grid(name).unwrap();
            assert!(g.windows(2).all(|w| w[0] > w[1]), "{name}");
        }
    }
}
