use anyhow::Result;
use orbiglue::topology_checker::*;
use serde::Serialize;

#[derive(Serialize)]
struct Row {
    node: String,
    piece: String,
    parent: String,
    point: String,
    orientation: String,
    chi: String,
    tau: String,
    slack: String,
    flag: String,
}

#[derive(Serialize)]
struct Summary {
    chi: String,
    tau: String,
    root_slack: String,
    total_slack: String,
    verdict: String,
    degrees_of_freedom: u32,
}

pub fn run(spec: &TreeSpec, out: &mut crate::output::Output) -> Result<i32> {
    let tree = DesingTree::from_spec(spec, &PieceCatalog::builtin()?)?;
    let report = ht_verdict(&tree)?;
    let dof = degrees_of_freedom(&tree);
    let mut rows = vec![Row {
        node: "root".into(),
        piece: tree.root.name.clone(),
        parent: String::new(),
        point: String::new(),
        orientation: String::new(),
        chi: tree.root.chi.to_string(),
        tau: tree.root.tau.to_string(),
        slack: tree.root.slack().to_string(),
        flag: String::new(),
    }];
    for n in &tree.nodes {
        let parent = n.parent.map_or("root".to_string(), |i| tree.nodes[i].label.clone());
        let sign = Rational::from_integer(n.orientation.sign());
        let flag = if report.det_r_required {
            "det R = 0 required".to_string()
        } else if !n.piece.kahler {
            "not Kähler".to_string()
        } else {
            String::new()
        };
        rows.push(Row {
            node: n.label.clone(),
            piece: n.piece.name.clone(),
            parent,
            point: n.point.clone(),
            orientation: format!("{:?}", n.orientation).to_lowercase(),
            chi: n.piece.chi.to_string(),
            tau: (n.piece.tau * sign).to_string(),
            slack: n.piece.slack().to_string(),
            flag,
        });
    }
    let verdict = match report.verdict {
        HtVerdict::Equality => "equality",
        HtVerdict::StrictIncrease => "strict-increase",
    };
    let summary = Summary {
        chi: report.chi.to_string(),
        tau: report.tau.to_string(),
        root_slack: report.root_slack.to_string(),
        total_slack: report.total_slack.to_string(),
        verdict: verdict.into(),
        degrees_of_freedom: dof,
    };

    println!("{:<10} {:<8} {:<8} {:<8} {:<6} {:>6} {:>6} {:>6}  flag", "node", "piece", "parent", "point", "orient", "chi", "tau", "slack");
    for r in &rows {
        println!(
            "{:<10} {:<8} {:<8} {:<8} {:<6} {:>6} {:>6} {:>6}  {}",
            r.node, r.piece, r.parent, r.point, r.orientation, r.chi, r.tau, r.slack, r.flag
        );
    }
    println!(
        "chi = {}, tau = {}, 2 chi - 3 |tau| = {} (root {}): {verdict}; degrees of freedom {dof}",
        summary.chi, summary.tau, summary.total_slack, summary.root_slack
    );
    for d in &report.diagnosis {
        println!("  {d}");
    }
    out.csv("tree.csv", &rows)?;
    out.csv("verdict.csv", &[summary])?;
    out.note("verdict", verdict.into());
    Ok(0)
}
