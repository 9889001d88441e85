use saptree_web::{explore_turn_json, simulate_json, verify_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn turn_views_agree_with_simulated_rows() {
    let sim = parse(&simulate_json("star_burst", 24, 3, "2").unwrap());
    let instance = sim["instance"].as_str().unwrap();
    for row in sim["rows"].as_array().unwrap() {
        let t = row["t"].as_u64().unwrap() as usize;
        let view = parse(&explore_turn_json(instance, t, "2").unwrap());
        assert_eq!(view["arrival"], row["b_id"]);
        assert_eq!(view["turn_class"], row["turn_class"]);
        assert_eq!(
            view["deaths"].as_array().unwrap().len() as u64,
            row["deaths_count"].as_u64().unwrap()
        );
        assert_eq!(view["dispatcher"], row["dispatch_id"]);
        let path_len = view["path"].as_array().unwrap().len();
        match row["dist"].as_str().unwrap() {
            "inf" => assert_eq!(path_len, 0),
            d => assert_eq!(path_len - 1, d.parse::<usize>().unwrap()),
        }
        let aug = view["augmenting_path"].as_array().unwrap().len();
        match row["pi_len"].as_u64() {
            Some(k) => assert_eq!(aug as u64, k + 1),
            None => assert_eq!(aug, 0),
        }
    }
}

#[test]
fn simulation_is_deterministic() {
    let a = simulate_json("random_tree", 60, 11, "3/2").unwrap();
    let b = simulate_json("random_tree", 60, 11, "3/2").unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_generated_instance() {
    let sim = parse(&simulate_json("degree2", 20, 1, "2").unwrap());
    let outcomes = parse(&verify_json(sim["instance"].as_str().unwrap(), false).unwrap());
    let d2 = outcomes
        .as_array()
        .unwrap()
        .iter()
        .find(|o| o["name"] == "degree_two")
        .unwrap();
    assert_eq!(d2["status"], "pass");
}
