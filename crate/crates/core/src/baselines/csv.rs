use super::{FunctionFeatureVector, ProvenanceFeatureVector};

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// One row per instance: id, one column per selected unigram (`u:<word>`),
/// then the scalar features.
pub fn function_features_csv(unigrams: &[String], rows: &[(String, FunctionFeatureVector)]) -> String {
    let mut header = vec!["id".to_string()];
    header.extend(unigrams.iter().map(|u| quote(&format!("u:{u}"))));
    header.extend(FunctionFeatureVector::SCALAR_NAMES.iter().map(|s| s.to_string()));
    let mut out = header.join(",") + "\n";
    for (id, f) in rows {
        let mut cells = vec![quote(id)];
        cells.extend(f.unigram_reduced.iter().map(|v| v.to_string()));
        cells.extend([
            f.citation_density.to_string(),
            f.year_difference.to_string(),
            f.citing_location.to_string(),
            f.citation_frequency.to_string(),
            f.same_author_citations.to_string(),
            f.self_reference.to_string(),
        ]);
        out += &(cells.join(",") + "\n");
    }
    out
}

pub fn provenance_features_csv(rows: &[(String, ProvenanceFeatureVector)]) -> String {
    let mut out = format!("id,{}\n", ProvenanceFeatureVector::NAMES.join(","));
    for (id, f) in rows {
        out += &format!(
            "{},{},{},{},{}\n",
            quote(id),
            f.surface_matching,
            f.number_matching,
            f.bigram_matching,
            f.cosine_similarity
        );
    }
    out
}
