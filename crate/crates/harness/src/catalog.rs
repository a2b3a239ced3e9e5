//! Experiment configurations shipped with the tool.

pub struct Bundled {
    pub name: &'static str,
    pub text: &'static str,
}

pub const EXPERIMENTS: &[Bundled] = &[
    Bundled {
        name: "fig1",
        text: include_str!("../experiments/fig1.cfg"),
    },
    Bundled {
        name: "table2",
        text: include_str!("../experiments/table2.cfg"),
    },
    Bundled {
        name: "table3",
        text: include_str!("../experiments/table3.cfg"),
    },
    Bundled {
        name: "table4",
        text: include_str!("../experiments/table4.cfg"),
    },
    Bundled {
        name: "table5",
        text: include_str!("../experiments/table5.cfg"),
    },
    Bundled {
        name: "table6",
        text: include_str!("../experiments/table6.cfg"),
    },
    Bundled {
        name: "table7",
        text: include_str!("../experiments/table7.cfg"),
    },
];

/// Looks up a bundled experiment by name, with or without `.cfg`.
pub fn find(name: &str) -> Option<&'static Bundled> {
    let name = name.strip_suffix(".cfg").unwrap_or(name);
    EXPERIMENTS.iter().find(|b| b.name == name)
}
