use autonet::Padding;
use ocean::embedding::{EmbeddingConfig, WindowMode};
use ocean::models::{catalog, InputKind, LayerDesc, NamedLayer, Task};

fn parse_layer(text: &str) -> NamedLayer {
    let (name, body) = text.split_once(' ').unwrap();
    let f: Vec<&str> = body.split(',').collect();
    if !f[0].contains('x') {
        return NamedLayer {
            name: name.into(),
            desc: LayerDesc::Dense { units: f[0].parse().unwrap() },
        };
    }
    let (kh, kw) = f[0].split_once('x').unwrap();
    let (kh, kw) = (kh.parse().unwrap(), kw.parse().unwrap());
    let stride = f.iter().find_map(|x| x.strip_prefix('s')?.parse().ok()).unwrap_or(1);
    let padding = if f.contains(&"same") { Padding::Same } else { Padding::Valid };
    let desc = if name.starts_with("mpool") {
        LayerDesc::MaxPool { kh, kw, stride, padding }
    } else {
        LayerDesc::Conv {
            kh,
            kw,
            filters: f[1].parse().unwrap(),
            stride,
            padding,
        }
    };
    NamedLayer { name: name.into(), desc }
}

#[test]
fn catalog_matches_transcribed_tables() {
    let text = include_str!("data/catalog.txt");
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).collect();
    let specs = catalog();
    assert_eq!(rows.len(), specs.len());
    for (row, spec) in rows.iter().zip(&specs) {
        let f: Vec<&str> = row.split('|').map(str::trim).collect();
        assert_eq!(spec.id, f[0].parse::<usize>().unwrap());
        let task = match f[1] {
            "regression" => Task::Regression,
            _ => Task::Classification,
        };
        assert_eq!(spec.task, task, "model {}", spec.id);
        let input: InputKind = serde_json::from_value(serde_json::Value::String(f[2].into())).unwrap();
        assert_eq!(spec.input_kind, input, "model {}", spec.id);
        assert_eq!(spec.learning_rate, f[3].parse::<f64>().unwrap(), "model {}", spec.id);
        assert_eq!(spec.output_units, f[4].parse::<usize>().unwrap(), "model {}", spec.id);
        let layers: Vec<NamedLayer> = f[5].split(';').map(str::trim).filter(|s| !s.is_empty()).map(parse_layer).collect();
        assert_eq!(spec.layers, layers, "model {}", spec.id);
    }
}

#[test]
fn embedding_presets() {
    let e1 = EmbeddingConfig::embedding1();
    let e2 = EmbeddingConfig::embedding2();
    let e3 = EmbeddingConfig::embedding3();
    assert_eq!((e1.dim, e1.num_sampled, e1.window), (40, 20, WindowMode::AllWordsW1));
    assert_eq!((e2.dim, e2.num_sampled, e2.window), (250, 50, WindowMode::AllWordsW1));
    assert_eq!((e3.dim, e3.num_sampled, e3.window), (250, 50, WindowMode::AdjectivesW2));
}

#[test]
fn learning_rates_come_from_the_published_set() {
    for s in catalog().iter().skip(1) {
        assert!([0.001, 0.0001, 0.005, 0.0005].contains(&s.learning_rate), "model {}", s.id);
    }
}
