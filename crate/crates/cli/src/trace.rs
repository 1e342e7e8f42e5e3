//! Movement traces in ns-2 setdest form. Two initial-position lines per
//! node, then one movement order per line:
//!
//! ```text
//! $node_(0) set X_ 100.000000
//! $node_(0) set Y_ 200.000000
//! $ns_ at 61.000000 "$node_(0) setdest 100.000000 200.000000 5"
//! ```
//!
//! Times and coordinates carry exactly six decimals. Speeds are printed with
//! however many digits round-trip exactly, so replaying a parsed trace stays
//! well inside a millimeter of the original run.

use std::path::Path;

use fmm_core::mobility::TraceEvent;
use fmm_core::Point;

use crate::{CliError, Result};

pub fn format_trace(initial: &[Point], events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for (id, p) in initial.iter().enumerate() {
        out.push_str(&format!("$node_({id}) set X_ {:.6}\n", p.x));
        out.push_str(&format!("$node_({id}) set Y_ {:.6}\n", p.y));
    }
    let mut ordered: Vec<&TraceEvent> = events.iter().collect();
    ordered.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.node.cmp(&b.node)));
    for e in ordered {
        out.push_str(&format!(
            "$ns_ at {:.6} \"$node_({}) setdest {:.6} {:.6} {}\"\n",
            e.time, e.node, e.dest.x, e.dest.y, e.speed
        ));
    }
    out
}

pub fn write_trace(path: &Path, initial: &[Point], events: &[TraceEvent]) -> Result<()> {
    std::fs::write(path, format_trace(initial, events))
        .map_err(|e| CliError::file(path.display().to_string(), e))
}

/// Parses a trace back into initial positions and movement orders. The
/// grammar is exactly what `format_trace` emits; anything else is an error
/// with its line number.
pub fn parse_trace(text: &str) -> Result<(Vec<Point>, Vec<TraceEvent>)> {
    let mut xs: Vec<Option<f64>> = Vec::new();
    let mut ys: Vec<Option<f64>> = Vec::new();
    let mut events = Vec::new();

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("$node_(") {
            let (id, rest) = split_node_id(rest, lineno)?;
            let (axis, value) = match rest.strip_prefix(" set ") {
                Some(r) => r
                    .split_once(' ')
                    .ok_or_else(|| CliError::trace(lineno, "missing coordinate value"))?,
                None => return Err(CliError::trace(lineno, "expected `set X_`/`set Y_`")),
            };
            let value = parse_f64(value, lineno)?;
            let slot = match axis {
                "X_" => &mut xs,
                "Y_" => &mut ys,
                other => {
                    return Err(CliError::trace(lineno, format!("unknown axis {other:?}")));
                }
            };
            if slot.len() <= id {
                slot.resize(id + 1, None);
            }
            if slot[id].replace(value).is_some() {
                return Err(CliError::trace(lineno, format!("node {id} set twice")));
            }
        } else if let Some(rest) = line.strip_prefix("$ns_ at ") {
            let (time, order) = rest
                .split_once(" \"")
                .ok_or_else(|| CliError::trace(lineno, "expected quoted setdest order"))?;
            let time = parse_f64(time, lineno)?;
            let order = order
                .strip_suffix('"')
                .ok_or_else(|| CliError::trace(lineno, "unterminated quote"))?;
            let rest = order
                .strip_prefix("$node_(")
                .ok_or_else(|| CliError::trace(lineno, "order must address a node"))?;
            let (node, rest) = split_node_id(rest, lineno)?;
            let args = rest
                .strip_prefix(" setdest ")
                .ok_or_else(|| CliError::trace(lineno, "expected setdest"))?;
            let parts: Vec<&str> = args.split(' ').collect();
            if parts.len() != 3 {
                return Err(CliError::trace(lineno, format!("setdest takes 3 arguments, got {}", parts.len())));
            }
            events.push(TraceEvent {
                time,
                node,
                dest: Point::new(parse_f64(parts[0], lineno)?, parse_f64(parts[1], lineno)?),
                speed: parse_f64(parts[2], lineno)?,
            });
        } else {
            return Err(CliError::trace(lineno, format!("unrecognized line {line:?}")));
        }
    }

    if xs.len() != ys.len() {
        return Err(CliError::trace(0, format!("{} X_ lines but {} Y_ lines", xs.len(), ys.len())));
    }
    let mut initial = Vec::with_capacity(xs.len());
    for (id, (x, y)) in xs.into_iter().zip(ys).enumerate() {
        match (x, y) {
            (Some(x), Some(y)) => initial.push(Point::new(x, y)),
            _ => return Err(CliError::trace(0, format!("node {id} has no initial position"))),
        }
    }
    for e in &events {
        if e.node >= initial.len() {
            return Err(CliError::trace(0, format!("order addresses unknown node {}", e.node)));
        }
    }
    Ok((initial, events))
}

fn split_node_id(rest: &str, lineno: usize) -> Result<(usize, &str)> {
    let close = rest
        .find(')')
        .ok_or_else(|| CliError::trace(lineno, "unterminated node id"))?;
    let id = rest[..close]
        .parse::<usize>()
        .map_err(|e| CliError::trace(lineno, format!("bad node id: {e}")))?;
    Ok((id, &rest[close + 1..]))
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| CliError::trace(lineno, format!("bad number {s:?}: {e}")))
}

/// Positions at each requested time (ascending), reconstructed purely from a
/// trace: nodes head toward their latest ordered destination at its speed,
/// stop on arrival, and wait for the next order.
pub fn replay(initial: &[Point], events: &[TraceEvent], times: &[f64]) -> Vec<Vec<Point>> {
    let mut frames = vec![Vec::with_capacity(initial.len()); times.len()];
    for (node, &start) in initial.iter().enumerate() {
        let mut pos = start;
        let mut target: Option<(Point, f64)> = None;
        let mut t = times.first().map_or(0.0, |&t0| t0.min(0.0));
        let mut pending = events.iter().filter(|e| e.node == node).peekable();
        for (k, &sample) in times.iter().enumerate() {
            while let Some(e) = pending.peek() {
                if e.time > sample {
                    break;
                }
                advance(&mut pos, &mut target, e.time - t);
                t = e.time;
                target = Some((e.dest, e.speed));
                pending.next();
            }
            advance(&mut pos, &mut target, sample - t);
            t = sample;
            frames[k].push(pos);
        }
    }
    frames
}

fn advance(pos: &mut Point, target: &mut Option<(Point, f64)>, dt: f64) {
    let Some((dest, speed)) = *target else {
        return;
    };
    let dist = pos.distance(dest);
    let step = speed * dt;
    if step >= dist {
        *pos = dest;
        *target = None;
    } else if dist > 0.0 {
        *pos = pos.lerp(dest, step / dist);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_is_exact() {
        let initial = [Point::new(0.0, 0.0)];
        let events = [TraceEvent {
            time: 61.0,
            node: 0,
            dest: Point::new(100.0, 200.0),
            speed: 5.0,
        }];
        let text = format_trace(&initial, &events);
        assert_eq!(
            text,
            "$node_(0) set X_ 0.000000\n\
             $node_(0) set Y_ 0.000000\n\
             $ns_ at 61.000000 \"$node_(0) setdest 100.000000 200.000000 5\"\n"
        );
    }

    #[test]
    fn empty_event_list_writes_only_initial_positions() {
        let text = format_trace(&[Point::new(1.5, 2.0), Point::new(3.0, 4.0)], &[]);
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().all(|l| l.contains("set X_") || l.contains("set Y_")));
    }

    #[test]
    fn events_are_sorted_by_time_then_node() {
        let events = [
            TraceEvent { time: 5.0, node: 1, dest: Point::new(1.0, 1.0), speed: 1.0 },
            TraceEvent { time: 2.0, node: 0, dest: Point::new(2.0, 2.0), speed: 1.0 },
            TraceEvent { time: 5.0, node: 0, dest: Point::new(3.0, 3.0), speed: 1.0 },
        ];
        let text = format_trace(&[Point::default(); 2], &events);
        let orders: Vec<&str> = text.lines().filter(|l| l.starts_with("$ns_")).collect();
        assert!(orders[0].contains("at 2.000000 \"$node_(0)"));
        assert!(orders[1].contains("at 5.000000 \"$node_(0)"));
        assert!(orders[2].contains("at 5.000000 \"$node_(1)"));
    }

    #[test]
    fn parse_inverts_format() {
        let initial = vec![Point::new(12.25, 9500.5), Point::new(0.0, 10_000.0)];
        let events = vec![
            TraceEvent { time: 61.0, node: 0, dest: Point::new(100.0, 200.0), speed: 5.0 },
            TraceEvent { time: 100.5, node: 1, dest: Point::new(8.125, 9.75), speed: 3.7 },
        ];
        let (pi, pe) = parse_trace(&format_trace(&initial, &events)).unwrap();
        assert_eq!(pi, initial);
        assert_eq!(pe, events);
    }

    #[test]
    fn malformed_lines_name_their_line_number() {
        let cases = [
            "$node_(0) set Z_ 1.0\n",
            "$ns_ at 5.0 $node_(0) setdest 1 2 3\n",
            "$ns_ at 5.0 \"$node_(0) setdest 1 2\"\n",
            "garbage\n",
            "$node_(x) set X_ 1.0\n",
        ];
        for bad in cases {
            let text = format!("$node_(0) set X_ 0.000000\n$node_(0) set Y_ 0.000000\n{bad}");
            let err = parse_trace(&text).unwrap_err();
            assert!(err.to_string().contains("line 3"), "{bad:?} -> {err}");
        }
    }

    #[test]
    fn missing_initial_position_is_an_error() {
        let err = parse_trace("$node_(0) set X_ 1.000000\n").unwrap_err();
        assert!(err.to_string().contains("X_ lines"), "{err}");
        let err = parse_trace(
            "$node_(1) set X_ 1.000000\n$node_(1) set Y_ 1.000000\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("node 0"), "{err}");
    }

    #[test]
    fn replay_moves_stops_and_waits() {
        let initial = [Point::new(0.0, 0.0)];
        let events = [
            TraceEvent { time: 10.0, node: 0, dest: Point::new(100.0, 0.0), speed: 10.0 },
            TraceEvent { time: 30.0, node: 0, dest: Point::new(100.0, 50.0), speed: 5.0 },
        ];
        let times = [0.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 45.0];
        let frames = replay(&initial, &events, &times);
        let track: Vec<Point> = frames.iter().map(|f| f[0]).collect();
        assert_eq!(track[0], Point::new(0.0, 0.0));
        assert_eq!(track[1], Point::new(0.0, 0.0)); // order just issued
        assert_eq!(track[2], Point::new(50.0, 0.0)); // halfway
        assert_eq!(track[3], Point::new(100.0, 0.0)); // arrived
        assert_eq!(track[4], Point::new(100.0, 0.0)); // waiting
        assert_eq!(track[5], Point::new(100.0, 0.0)); // second order issued
        assert_eq!(track[6], Point::new(100.0, 25.0));
        assert_eq!(track[7], Point::new(100.0, 50.0)); // arrived and clamped
    }
}
