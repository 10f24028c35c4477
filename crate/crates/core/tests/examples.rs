mod exact_leaf_law {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/exact_leaf_law.rs"));
}

#[test]
fn exact_leaf_law_runs() {
    exact_leaf_law::run_example().expect("exact_leaf_law example should run");
}

mod experiment_config {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/experiment_config.rs"));
}

#[test]
fn experiment_config_runs() {
    experiment_config::run_example().expect("experiment_config example should run");
}

mod frequency_estimator {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/frequency_estimator.rs"));
}

#[test]
fn frequency_estimator_runs() {
    frequency_estimator::run_example().expect("frequency_estimator example should run");
}

mod map_estimator {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/map_estimator.rs"));
}

#[test]
fn map_estimator_runs() {
    map_estimator::run_example().expect("map_estimator example should run");
}

mod nested_families {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/nested_families.rs"));
}

#[test]
fn nested_families_runs() {
    nested_families::run_example().expect("nested_families example should run");
}

mod pinched_star_majority {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/pinched_star_majority.rs"));
}

#[test]
fn pinched_star_majority_runs() {
    pinched_star_majority::run_example().expect("pinched_star_majority example should run");
}

mod reconstruction_bounds {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reconstruction_bounds.rs"));
}

#[test]
fn reconstruction_bounds_runs() {
    reconstruction_bounds::run_example().expect("reconstruction_bounds example should run");
}

mod simulate_leaves {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/simulate_leaves.rs"));
}

#[test]
fn simulate_leaves_runs() {
    simulate_leaves::run_example().expect("simulate_leaves example should run");
}

mod tkf91_reconstruction {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tkf91_reconstruction.rs"));
}

#[test]
fn tkf91_reconstruction_runs() {
    tkf91_reconstruction::run_example().expect("tkf91_reconstruction example should run");
}

mod tkf91_sequences {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tkf91_sequences.rs"));
}

#[test]
fn tkf91_sequences_runs() {
    tkf91_sequences::run_example().expect("tkf91_sequences example should run");
}

mod total_variation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/total_variation.rs"));
}

#[test]
fn total_variation_runs() {
    total_variation::run_example().expect("total_variation example should run");
}

mod transition_matrices {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/transition_matrices.rs"));
}

#[test]
fn transition_matrices_runs() {
    transition_matrices::run_example().expect("transition_matrices example should run");
}

mod tree_geometry {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tree_geometry.rs"));
}

#[test]
fn tree_geometry_runs() {
    tree_geometry::run_example().expect("tree_geometry example should run");
}

mod uniform_chain_estimator {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/uniform_chain_estimator.rs"));
}

#[test]
fn uniform_chain_estimator_runs() {
    uniform_chain_estimator::run_example().expect("uniform_chain_estimator example should run");
}
