//! Freezes the prompt templates: any wording or formatting change must be
//! deliberate and shows up as a golden-file diff. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test -p mpbench-core --test prompt_golden`.

use std::path::Path;

use mpbench_core::prompt::{build_prompt, render_system_description, InstructionConfig};
use mpbench_core::scenario::{build_scenario_state, synth_scenario, FeatureConfig, Template};

fn check(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("golden file {} unreadable: {e}", path.display()));
    assert_eq!(actual, expected, "{name} drifted from its golden copy");
}

#[test]
fn system_description_matches_golden() {
    check("system_description.txt", &render_system_description());
}

#[test]
fn default_prompt_matches_golden() {
    let file = synth_scenario(Template::LeadVehicleFollowing, 0);
    let scene = build_scenario_state(&file, 20, &FeatureConfig::default()).unwrap();
    let bundle = build_prompt(&scene, &InstructionConfig::default(), &FeatureConfig::default())
        .unwrap();
    check("lead_vehicle_instruction.txt", &bundle.instruction_text);
    check("lead_vehicle_input.txt", &bundle.input_text);
}
