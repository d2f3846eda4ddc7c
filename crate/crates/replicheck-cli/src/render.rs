//! Text rendering of witnesses and simulated outcomes.
//!
//! A witness prints as one column per session: each store event appears in
//! its session's column as `label:ACTION(loc, value)` in schedule order,
//! with `<-eN` marking where a read got its value (absent for reads of the
//! initial value).

use std::fmt::Write as _;

use replicheck::driver::witness::{EventAction, Witness};
use replicheck::dsl::LibraryDef;
use replicheck::frontend::location_universe;
use replicheck::store::AbstractExecution;
use replicheck::value;

const COL_WIDTH: usize = 30;

/// `s1:push(1)=_  s2:pop=EMPTY` style summary of an abstract execution.
pub fn alpha_line(alpha: &AbstractExecution) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut order: Vec<usize> = (0..alpha.invocations.len()).collect();
    order.sort_by_key(|&i| (alpha.invocations[i].session, alpha.invocations[i].id));
    for i in order {
        let inv = &alpha.invocations[i];
        let arg = if inv.arg == value::BOT {
            String::new()
        } else {
            value::render(inv.arg)
        };
        parts.push(format!(
            "s{}:{}({})={}",
            inv.session + 1,
            inv.method,
            arg,
            value::render(inv.ret)
        ));
    }
    parts.join("  ")
}

pub fn witness(lib: &LibraryDef, w: &Witness) -> String {
    let universe = location_universe(lib, w.k);
    let nsess = w.history.sessions.len();
    let mut out = String::new();

    let _ = writeln!(out, "history:");
    for (s, invs) in w.history.sessions.iter().enumerate() {
        let line: Vec<String> = invs
            .iter()
            .map(|i| {
                let arg = if i.arg == value::BOT {
                    String::new()
                } else {
                    value::render(i.arg)
                };
                format!("{}({})", i.method, arg)
            })
            .collect();
        let _ = writeln!(out, "  s{}: {}", s + 1, line.join("; "));
    }

    let _ = writeln!(out, "events (schedule order, one column per session):");
    let mut header = String::from("      ");
    for s in 0..nsess {
        header.push_str(&format!("{:<width$}", format!("s{}", s + 1), width = COL_WIDTH));
    }
    let _ = writeln!(out, "{}", header.trim_end());
    for ev in &w.events {
        let act = match ev.action {
            EventAction::Read => "R",
            EventAction::Write => "W",
            EventAction::Update => "U",
        };
        let loc = universe.describe(ev.loc);
        let val = match ev.action {
            EventAction::Read => format!("={}", value::render(ev.read.unwrap_or(value::BOT))),
            EventAction::Write => format!(", {}", value::render(ev.write.unwrap_or(value::BOT))),
            EventAction::Update => format!(
                ", {}->{}",
                value::render(ev.read.unwrap_or(value::BOT)),
                value::render(ev.write.unwrap_or(value::BOT))
            ),
        };
        let src = w
            .rf
            .iter()
            .find(|(_, b)| *b == ev.id)
            .map(|(a, _)| format!("  <-e{a}"))
            .unwrap_or_default();
        let cell = format!("{}:{act}({loc}{val}){src}", ev.label);
        let mut line = format!("  e{:<3} ", ev.id);
        for s in 0..nsess {
            if s == ev.session {
                line.push_str(&format!("{:<width$}", cell, width = COL_WIDTH));
            } else {
                line.push_str(&" ".repeat(COL_WIDTH));
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }

    let _ = writeln!(out, "abstract execution: {}", alpha_line(&w.alpha));
    let slots: Vec<String> = w.binding.iter().map(|b| format!("#{b}")).collect();
    let _ = writeln!(out, "axiom {} violated by invocation slots [{}]", w.axiom, slots.join(", "));
    out
}
