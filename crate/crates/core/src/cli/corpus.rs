use std::f64::consts::PI;

use super::config::{ScattererEntry, ScenarioConfig, TaskOptions, Tolerances};
use crate::forward::{Condition, ScattererClass, Shape};
use crate::geometry::{CurveShape, RuleSpec};
use crate::specfun::SeriesTruncation;

const SPHERE_RULE: RuleSpec = RuleSpec::Sphere {
    n_polar: 16,
    n_azimuth: 32,
};
const REFINED_RULE: RuleSpec = RuleSpec::Sphere {
    n_polar: 24,
    n_azimuth: 48,
};
const RETRIEVAL_RULE: RuleSpec = RuleSpec::Sphere {
    n_polar: 8,
    n_azimuth: 16,
};
const CIRCLE_RULE: RuleSpec = RuleSpec::Circle { n_circle: 64 };

fn sphere(condition: Condition) -> ScattererEntry {
    ScattererEntry {
        shape: Shape::Sphere { radius: 1.0 },
        condition,
        offset: Vec::new(),
    }
}

fn scenario(
    name: &str,
    scatterers: Vec<ScattererEntry>,
    k: f64,
    rule: RuleSpec,
    tasks: &[&str],
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        scatterers,
        k,
        rule,
        truncation: None,
        tasks: tasks.iter().map(|t| t.to_string()).collect(),
        tolerances: Tolerances::default(),
        options: TaskOptions::default(),
        output_dir: None,
        seed: 0,
    }
}

fn sphere_spectrum(name: &str, condition: Condition, k: f64) -> ScenarioConfig {
    let mut s = scenario(
        name,
        vec![sphere(condition)],
        k,
        SPHERE_RULE,
        &["forward", "spectrum"],
    );
    s.truncation = Some(SeriesTruncation {
        max_order: 24,
        tail_tolerance: SeriesTruncation::DEFAULT_TAIL_TOLERANCE,
    });
    s.options.refined_rule = Some(REFINED_RULE);
    s
}

fn sphere_retrieval(name: &str, condition: Condition) -> ScenarioConfig {
    let mut s = scenario(
        name,
        vec![sphere(condition)],
        1.0,
        RETRIEVAL_RULE,
        &["retrieve"],
    );
    s.options.retrieval_rule = Some(RETRIEVAL_RULE);
    s
}

/// Bundled scenarios. Together they exercise every acceptance criterion
/// and every boundary condition.
pub fn corpus() -> Vec<ScenarioConfig> {
    let dirichlet = Condition::Dirichlet;
    let impedance = Condition::Impedance { eta: 1.0 };
    let mut out = vec![
        sphere_spectrum("sphere-dirichlet-kr1", dirichlet, 1.0),
        sphere_spectrum("sphere-dirichlet-kr2", dirichlet, 2.0),
        sphere_spectrum("sphere-impedance-kr1", impedance, 1.0),
        sphere_spectrum("sphere-impedance-kr2", impedance, 2.0),
        sphere_spectrum("ball-n2-kr1", Condition::Penetrable { n: 2.0 }, 1.0),
        sphere_spectrum("ball-n2-kr2", Condition::Penetrable { n: 2.0 }, 2.0),
        sphere_spectrum("ball-n0.5-kr1", Condition::Penetrable { n: 0.5 }, 1.0),
    ];

    let mut interior = sphere_spectrum("sphere-dirichlet-krpi", dirichlet, PI);
    interior.options.expect_interior_zero = true;
    out.push(interior);

    out.push(scenario(
        "disk-dirichlet-k1",
        vec![ScattererEntry {
            shape: Shape::Disk { radius: 1.0 },
            condition: dirichlet,
            offset: Vec::new(),
        }],
        1.0,
        CIRCLE_RULE,
        &["forward", "spectrum"],
    ));
    out.push(scenario(
        "circle-nystrom-k1",
        vec![ScattererEntry {
            shape: Shape::Curve {
                curve: CurveShape::Circle { radius: 1.0 },
                boundary_points: 64,
            },
            condition: dirichlet,
            offset: Vec::new(),
        }],
        1.0,
        CIRCLE_RULE,
        &["forward", "spectrum"],
    ));
    out.push(scenario(
        "kite-k1",
        vec![ScattererEntry {
            shape: Shape::Curve {
                curve: CurveShape::Kite,
                boundary_points: 64,
            },
            condition: dirichlet,
            offset: Vec::new(),
        }],
        1.0,
        CIRCLE_RULE,
        &["forward", "spectrum", "retrieve"],
    ));

    let mut translation = scenario(
        "sphere-translation-kr1",
        vec![sphere(dirichlet)],
        1.0,
        SPHERE_RULE,
        &["translation"],
    );
    translation.seed = 20_241_016;
    out.push(translation);

    out.push(sphere_retrieval("retrieve-sphere-dirichlet", dirichlet));
    out.push(sphere_retrieval("retrieve-sphere-impedance", impedance));
    out.push(sphere_retrieval(
        "retrieve-ball-n2",
        Condition::Penetrable { n: 2.0 },
    ));
    let mut mismatch = sphere_retrieval("retrieve-impedance-soft-hint", impedance);
    mismatch.options.class_hint = Some(ScattererClass::SoundSoft);
    mismatch.options.expect_disambiguation_failure = true;
    out.push(mismatch);

    let mut shifted = scenario(
        "compare-shifted-sphere",
        vec![
            sphere(dirichlet),
            ScattererEntry {
                offset: vec![0.1, 0.0, 0.0],
                ..sphere(dirichlet)
            },
        ],
        1.0,
        SPHERE_RULE,
        &["compare"],
    );
    shifted.tolerances.compare_max_r_diff = Some(1e-12);
    shifted.tolerances.compare_min_m_diff = Some(1e-3);
    out.push(shifted);

    let mut radius = scenario(
        "compare-radius",
        vec![
            sphere(dirichlet),
            ScattererEntry {
                shape: Shape::Sphere { radius: 1.1 },
                ..sphere(dirichlet)
            },
        ],
        1.0,
        SPHERE_RULE,
        &["compare"],
    );
    radius.tolerances.compare_min_r_diff = Some(1e-3);
    out.push(radius);

    let mut same = scenario(
        "compare-identical",
        vec![sphere(impedance), sphere(impedance)],
        1.0,
        SPHERE_RULE,
        &["compare"],
    );
    same.tolerances.compare_max_r_diff = Some(0.0);
    same.tolerances.compare_max_m_diff = Some(0.0);
    out.push(same);
    out
}
