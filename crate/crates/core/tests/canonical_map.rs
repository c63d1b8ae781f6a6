//! Checks of the checked-in canonical house map against independent
//! test-local oracles (flood fill, BFS).

use std::collections::VecDeque;

use lightcast_core::grid::{features, CellKind, GridMap};
use lightcast_core::mdp::Mdp;

fn canonical() -> (String, GridMap) {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/house20.map");
    let text = std::fs::read_to_string(path).unwrap();
    let map = GridMap::parse(&text).unwrap();
    (text, map)
}

/// Test-local flood fill over the raw glyph grid.
fn flood_fill_count(text: &str) -> usize {
    let grid: Vec<Vec<char>> = text
        .split("\n\n")
        .next()
        .unwrap()
        .lines()
        .map(|l| l.chars().collect())
        .collect();
    let (h, w) = (grid.len(), grid[0].len());
    let start = (0..h)
        .flat_map(|r| (0..w).map(move |c| (r, c)))
        .find(|&(r, c)| grid[r][c] != '#')
        .unwrap();
    let mut seen = vec![vec![false; w]; h];
    let mut queue = VecDeque::from([start]);
    seen[start.0][start.1] = true;
    let mut count = 0;
    while let Some((r, c)) = queue.pop_front() {
        count += 1;
        let neighbors = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for (nr, nc) in neighbors {
            if nr < h && nc < w && grid[nr][nc] != '#' && !seen[nr][nc] {
                seen[nr][nc] = true;
                queue.push_back((nr, nc));
            }
        }
    }
    count
}

#[test]
fn four_zones_with_expected_anchors() {
    let (_, map) = canonical();
    assert_eq!(map.width(), 20);
    assert_eq!(map.height(), 20);
    let goals = map.goal_candidates();
    assert_eq!(goals.len(), 4);
    let names: Vec<&str> = map.zones().iter().map(|z| z.name.as_str()).collect();
    assert_eq!(names, ["bedroom_a", "bedroom_b", "kitchen", "living_room"]);
    assert_eq!(map.zone_named("bedroom_a").unwrap().anchor, (4, 4));
    assert_eq!(map.zone_named("bedroom_b").unwrap().anchor, (4, 14));
    assert_eq!(map.zone_named("kitchen").unwrap().anchor, (14, 15));
    assert_eq!(map.zone_named("living_room").unwrap().anchor, (14, 5));
    let ids: Vec<u8> = goals.iter().map(|(z, _)| z.0).collect();
    assert_eq!(ids, [0, 1, 2, 3]);
}

#[test]
fn free_cell_count_matches_flood_fill_oracle() {
    let (text, map) = canonical();
    let oracle = flood_fill_count(&text);
    assert_eq!(oracle, 293);
    assert_eq!(map.free_cells().count(), oracle);
    assert_eq!(Mdp::build(&map).n_states(), oracle);
}

#[test]
fn round_trips_bit_exactly() {
    let (text, map) = canonical();
    assert_eq!(map.to_text(), text);
    assert_eq!(GridMap::parse(&map.to_text()).unwrap(), map);
}

#[test]
fn wall_distance_feature_matches_bfs_oracle() {
    let (_, map) = canonical();
    let field = features(&map);

    // Test-local BFS distance to the nearest wall.
    let (h, w) = (map.height(), map.width());
    let mut dist = vec![vec![0usize; w]; h];
    let mut seen = vec![vec![false; w]; h];
    let mut queue = VecDeque::new();
    for r in 0..h {
        for c in 0..w {
            if map.kind(r, c) == CellKind::Wall {
                seen[r][c] = true;
                queue.push_back((r, c));
            }
        }
    }
    while let Some((r, c)) = queue.pop_front() {
        let neighbors = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        for (nr, nc) in neighbors {
            if nr < h && nc < w && !seen[nr][nc] && map.is_traversable(nr, nc) {
                seen[nr][nc] = true;
                dist[nr][nc] = dist[r][c] + 1;
                queue.push_back((nr, nc));
            }
        }
    }
    let max = map
        .free_cells()
        .map(|(r, c)| dist[r][c])
        .max()
        .unwrap() as f64;

    // A wall-adjacent cell scores exactly 1/max.
    assert_eq!(dist[1][1], 1);
    assert!((field.at(1, 1)[3] - 1.0 / max).abs() < 1e-15);
    for (r, c) in map.free_cells() {
        let expected = dist[r][c] as f64 / max;
        assert!((field.at(r, c)[3] - expected).abs() < 1e-15);
        assert!(field.at(r, c)[3] > 0.0 && field.at(r, c)[3] <= 1.0);
    }
}

#[test]
fn every_pair_connected_within_default_horizon() {
    let (_, map) = canonical();
    let mdp = Mdp::build(&map);
    let mut diameter = 0usize;
    for source in mdp.states() {
        let mut dist = vec![usize::MAX; mdp.n_states()];
        let mut queue = VecDeque::from([source]);
        dist[source.index()] = 0;
        while let Some(s) = queue.pop_front() {
            for a in lightcast_core::mdp::Action::ALL {
                let t = mdp.step(s, a);
                if dist[t.index()] == usize::MAX {
                    dist[t.index()] = dist[s.index()] + 1;
                    queue.push_back(t);
                }
            }
        }
        let far = dist.iter().copied().max().unwrap();
        assert!(far < usize::MAX, "disconnected state");
        diameter = diameter.max(far);
    }
    assert!(
        diameter < mdp.horizon_default(),
        "diameter {diameter} exceeds default horizon"
    );
}
