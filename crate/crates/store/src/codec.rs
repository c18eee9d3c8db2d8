//! XML forms of system networks and index event logs.

use chrono::{DateTime, Utc};
use sla_core::index::{IndexEvent, NetworkVersion, Selection, System, SystemNetwork};
use sla_core::xml::Element;
use sla_core::TimeSpan;

pub(crate) type Decode<T> = std::result::Result<T, String>;

pub(crate) fn attr<'a>(el: &'a Element, key: &str) -> Decode<&'a str> {
    el.get(key).ok_or_else(|| format!("<{}> lacks {key:?}", el.name))
}

pub(crate) fn parsed<T: std::str::FromStr>(el: &Element, key: &str) -> Decode<T>
where
    T::Err: std::fmt::Display,
{
    attr(el, key)?.parse().map_err(|e| format!("<{}> {key}: {e}", el.name))
}

pub(crate) fn opt_parsed<T: std::str::FromStr>(el: &Element, key: &str) -> Decode<Option<T>>
where
    T::Err: std::fmt::Display,
{
    el.get(key).map(|v| v.parse().map_err(|e| format!("<{}> {key}: {e}", el.name))).transpose()
}

pub(crate) fn network_to_xml(net: &SystemNetwork) -> Element {
    let mut root = Element::new("network").attr("id", net.id()).attr("name", net.name()).attr("deleted", net.is_deleted());
    for version in net.versions() {
        let mut v = Element::new("version").attr("number", version.version());
        for system in version.systems() {
            let mut s = Element::new("system").attr("name", &system.name).attr("entry", &system.entry);
            for option in &system.options {
                s.push(Element::new("option").attr("name", option));
            }
            v.push(s);
        }
        root.push(v);
    }
    root
}

pub(crate) fn network_from_xml(el: &Element) -> Decode<SystemNetwork> {
    let versions = el
        .elements("version")
        .map(|v| {
            let systems = v
                .elements("system")
                .map(|s| {
                    Ok(System {
                        name: attr(s, "name")?.to_string(),
                        entry: parsed(s, "entry")?,
                        options: s.elements("option").map(|o| attr(o, "name").map(str::to_string)).collect::<Decode<_>>()?,
                    })
                })
                .collect::<Decode<Vec<_>>>()?;
            NetworkVersion::new(parsed(v, "number")?, systems).map_err(|e| e.to_string())
        })
        .collect::<Decode<Vec<_>>>()?;
    SystemNetwork::from_versions(attr(el, "id")?, attr(el, "name")?, versions, parsed(el, "deleted")?).map_err(|e| e.to_string())
}

pub(crate) fn event_to_xml(event: &IndexEvent) -> Element {
    let mut el = Element::new("event")
        .attr("id", &event.event_id)
        .attr("occasion", &event.occasion_id)
        .attr("network", &event.network_id)
        .attr("version", event.network_version)
        .attr("span", event.span)
        .attr("author", &event.author)
        .attr("created-at", event.created_at.to_rfc3339());
    for (system, option) in event.selection.iter() {
        el.push(Element::new("choice").attr("system", system).attr("option", option));
    }
    if let Some(note) = &event.note {
        el.push(Element::new("note").with_text(note));
    }
    el
}

pub(crate) fn event_from_xml(el: &Element) -> Decode<IndexEvent> {
    let pairs: Vec<(&str, &str)> =
        el.elements("choice").map(|c| Ok((attr(c, "system")?, attr(c, "option")?))).collect::<Decode<_>>()?;
    let selection = Selection::from_pairs(pairs).ok_or("system chosen twice")?;
    let created_at: DateTime<Utc> = DateTime::parse_from_rfc3339(attr(el, "created-at")?)
        .map_err(|e| format!("created-at: {e}"))?
        .with_timezone(&Utc);
    Ok(IndexEvent {
        event_id: attr(el, "id")?.to_string(),
        occasion_id: attr(el, "occasion")?.to_string(),
        network_id: attr(el, "network")?.to_string(),
        network_version: parsed(el, "version")?,
        selection,
        span: parsed::<TimeSpan>(el, "span")?,
        note: el.first("note").map(|n| n.text.clone()),
        author: attr(el, "author")?.to_string(),
        created_at,
    })
}

pub(crate) fn events_to_xml(occasion: &str, events: &[IndexEvent]) -> Element {
    let mut root = Element::new("events").attr("occasion", occasion);
    for event in events {
        root.push(event_to_xml(event));
    }
    root
}

pub(crate) fn events_from_xml(el: &Element) -> Decode<Vec<IndexEvent>> {
    el.elements("event").map(event_from_xml).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use sla_core::index::decision_network_systems;

    #[test]
    fn network_round_trip() {
        let mut systems = decision_network_systems();
        systems[1].entry = "MOVE:decision | action".parse().unwrap();
        let net = SystemNetwork::create("dm", "Decisions & plans", decision_network_systems())
            .unwrap()
            .revise(systems)
            .unwrap()
            .tombstoned();
        let text = network_to_xml(&net).to_document();
        let back = network_from_xml(&sla_core::xml::parse(&text).unwrap()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn event_round_trip() {
        let event = IndexEvent {
            event_id: "e1".into(),
            occasion_id: "o1".into(),
            network_id: "dm".into(),
            network_version: 2,
            selection: Selection::new().with("MOVE", "decision").with("REALISATION", "mental"),
            span: TimeSpan::new(120_000, 126_000).unwrap(),
            note: Some("chair <summarised>".into()),
            author: "c0001".into(),
            created_at: Utc.with_ymd_and_hms(2026, 5, 4, 10, 30, 0).unwrap(),
        };
        let text = events_to_xml("o1", std::slice::from_ref(&event)).to_document();
        assert_eq!(events_from_xml(&sla_core::xml::parse(&text).unwrap()).unwrap(), [event]);
    }
}
