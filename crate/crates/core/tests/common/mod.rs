//! Fixtures shared by the integration tests and the acceptance harness.

#![allow(dead_code)]

use std::collections::HashMap;

use ndarray::Array2;
use rand::Rng;
use seqlabel::corpus::Sentence;
use seqlabel::crf::ScoreLattice;
use seqlabel::features::{Language, Lexicons, Task, TemplateSet};

/// Lattice with `n ≤ max_n`, `L ≤ max_l` and scores uniform in `[-2, 2)`.
pub fn random_lattice(rng: &mut impl Rng, max_n: usize, max_l: usize) -> ScoreLattice {
    let n = rng.random_range(1..=max_n);
    let l = rng.random_range(1..=max_l);
    let em = Array2::from_shape_fn((n, l), |_| rng.random_range(-2.0..2.0));
    let tr = Array2::from_shape_fn((l + 1, l), |_| rng.random_range(-2.0..2.0));
    ScoreLattice::new(em, tr).expect("valid lattice")
}

pub struct Golden {
    pub table: &'static str,
    pub row: u8,
    pub templates: TemplateSet,
    pub sentence: Sentence,
    pub position: usize,
    pub expected: Vec<&'static str>,
}

impl Golden {
    /// Observations at `position` produced by this row, in emission order.
    pub fn actual(&self) -> Vec<String> {
        let prefix = format!("T{}[", self.row);
        self.templates
            .observations(&self.sentence, self.position)
            .expect("instantiates")
            .into_iter()
            .filter(|o| o.starts_with(&prefix))
            .collect()
    }
}

fn chars(s: &str) -> Sentence {
    let tokens: Vec<String> = s.chars().map(String::from).collect();
    Sentence::from_tokens(&tokens).unwrap()
}

fn tagged(tokens: &[&str], pos: &[&str]) -> Sentence {
    Sentence::from_tokens(tokens).unwrap().with_aux(pos).unwrap()
}

/// One hand-derived instantiation for every template row of every task.
pub fn template_goldens() -> Vec<Golden> {
    let seg = || TemplateSet::new(Task::Seg, Language::Zh);
    let pos_en = || TemplateSet::new(Task::Pos, Language::En);
    let pos_zh = || TemplateSet::new(Task::Pos, Language::Zh);
    let ner_en = || {
        let clusters: HashMap<String, String> = [("Bank", "0110"), ("China", "1011"), ("of", "00")]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        TemplateSet::new(Task::Ner, Language::En).with_lexicons(Lexicons {
            clusters,
            radicals: HashMap::new(),
        })
    };
    let ner_zh = || {
        TemplateSet::new(Task::Ner, Language::Zh).with_lexicons(Lexicons {
            clusters: [("大学".to_string(), "101".to_string())].into(),
            radicals: [('大', "大".to_string()), ('学', "子".to_string())].into(),
        })
    };
    let beijing = || chars("我爱北京");
    let date = || chars("在3月。");
    let old_man = || Sentence::from_tokens(&["The", "old", "man", "boats"]).unwrap();
    let prc = || Sentence::from_tokens(&["中华人民共和国", "成立"]).unwrap();
    let bank = || tagged(&["Bank", "of", "China", "-", "based"], &["NNP", "IN", "NNP", ":", "VBN"]);
    let pku = || tagged(&["北京", "大学", "招生"], &["NR", "NN", "VV"]);

    let g = |table, row, templates, sentence, position, expected: &[&'static str]| Golden {
        table,
        row,
        templates,
        sentence,
        position,
        expected: expected.to_vec(),
    };
    vec![
        g("seg", 1, seg(), beijing(), 1, &["T1[-2]=<S>", "T1[-1]=我", "T1[0]=爱", "T1[1]=北", "T1[2]=京"]),
        g(
            "seg",
            2,
            seg(),
            beijing(),
            1,
            &["T2[-2,-1]=<S>我", "T2[-1,0]=我爱", "T2[0,1]=爱北", "T2[1,2]=北京", "T2[-1,1]=我北", "T2[0,2]=爱京"],
        ),
        g("seg", 3, seg(), chars("哈笑哈呵"), 2, &["T3[0,-2]=1", "T3[0,1]=0"]),
        g("seg", 4, seg(), beijing(), 1, &["T4[-1,0,1]=我爱北"]),
        g("seg", 5, seg(), date(), 2, &["T5[0]=2"]),
        g("seg", 6, seg(), date(), 2, &["T6[-1,0,1]=320"]),
        g("seg", 7, seg(), date(), 2, &["T7[-2,-1,0,1,2]=4320</S>"]),
        g("pos-en", 1, pos_en(), old_man(), 1, &["T1[-2]=<S>", "T1[-1]=The", "T1[0]=old", "T1[1]=man", "T1[2]=boats"]),
        g("pos-en", 2, pos_en(), old_man(), 1, &["T2[-1,0]=The old", "T2[0,1]=old man", "T2[-1,1]=The man"]),
        g("pos-en", 3, pos_en(), old_man(), 3, &["T3[0]p1=b", "T3[0]p2=bo", "T3[0]p3=boa", "T3[0]p4=boat", "T3[0]p5=boats"]),
        g("pos-en", 4, pos_en(), old_man(), 1, &["T4[0]s1=d", "T4[0]s2=ld", "T4[0]s3=old"]),
        g("pos-zh", 1, pos_zh(), prc(), 1, &["T1[-2]=<S>", "T1[-1]=中华人民共和国", "T1[0]=成立", "T1[1]=</S>", "T1[2]=</S>"]),
        g("pos-zh", 2, pos_zh(), prc(), 1, &["T2[-1,0]=中华人民共和国 成立", "T2[0,1]=成立 </S>", "T2[-1,1]=中华人民共和国 </S>"]),
        g("pos-zh", 3, pos_zh(), prc(), 0, &["T3[0]p1=中", "T3[0]p2=中华", "T3[0]p3=中华人"]),
        g("pos-zh", 4, pos_zh(), prc(), 1, &["T4[0]s1=立", "T4[0]s2=成立"]),
        g("pos-zh", 5, pos_zh(), prc(), 0, &["T5[0]=6+"]),
        g("ner-en", 1, ner_en(), bank(), 2, &["T1[-1]=of", "T1[0]=China", "T1[1]=-"]),
        g("ner-en", 2, ner_en(), bank(), 2, &["T2[-2,-1]=Bank of", "T2[-1,0]=of China", "T2[0,1]=China -", "T2[1,2]=- based"]),
        g("ner-en", 3, ner_en(), bank(), 2, &["T3[-1]=LL", "T3[0]=ULLLL", "T3[1]=O"]),
        g("ner-en", 4, ner_en(), bank(), 2, &["T4[-1,0]=LL ULLLL", "T4[0,1]=ULLLL O"]),
        g("ner-en", 5, ner_en(), bank(), 2, &["T5[-1]=0", "T5[0]=1", "T5[1]=0"]),
        g(
            "ner-en",
            6,
            ner_en(),
            bank(),
            2,
            &[
                "T6[-1,-1]=0 of",
                "T6[-1,0]=0 China",
                "T6[-1,1]=0 -",
                "T6[0,-1]=1 of",
                "T6[0,0]=1 China",
                "T6[0,1]=1 -",
                "T6[1,-1]=0 of",
                "T6[1,0]=0 China",
                "T6[1,1]=0 -",
            ],
        ),
        g("ner-en", 7, ner_en(), bank(), 2, &["T7[-1]=OF", "T7[0]=OTHER", "T7[1]=HYPHEN"]),
        g("ner-en", 8, ner_en(), bank(), 2, &["T8[-1,0]=0 OTHER", "T8[0,0]=1 OTHER", "T8[1,0]=0 OTHER"]),
        g("ner-en", 9, ner_en(), bank(), 2, &["T9[-1]=00", "T9[0]=1011"]),
        g("ner-en", 10, ner_en(), bank(), 2, &["T10[-1,0]=00 1011"]),
        g(
            "ner-en",
            11,
            ner_en(),
            bank(),
            2,
            &["T11[0]p1=C", "T11[0]p2=Ch", "T11[0]p3=Chi", "T11[0]p4=Chin", "T11[1]p1=-"],
        ),
        g(
            "ner-en",
            12,
            ner_en(),
            bank(),
            2,
            &["T12[-1]s1=f", "T12[-1]s2=of", "T12[0]s1=a", "T12[0]s2=na", "T12[0]s3=ina", "T12[0]s4=hina"],
        ),
        g("ner-en", 13, ner_en(), bank(), 2, &["T13[0]=NNP"]),
        g("ner-en", 14, ner_en(), bank(), 2, &["T14[-1,0]=IN NNP", "T14[0,1]=NNP :"]),
        g("ner-en", 15, ner_en(), bank(), 2, &["T15[-1,0,1]=IN NNP :"]),
        g("ner-en", 16, ner_en(), bank(), 2, &["T16[0]=NNP China"]),
        g("ner-zh", 1, ner_zh(), pku(), 1, &["T1[0]=NN"]),
        g("ner-zh", 2, ner_zh(), pku(), 1, &["T2[-1,0]=NR NN", "T2[0,1]=NN VV"]),
        g("ner-zh", 3, ner_zh(), pku(), 1, &["T3[-1,0,1]=NR NN VV"]),
        g("ner-zh", 4, ner_zh(), pku(), 1, &["T4[0]=NN 大学"]),
        g("ner-zh", 6, ner_zh(), pku(), 1, &["T6[-1]=北京", "T6[0]=大学", "T6[1]=招生"]),
        g("ner-zh", 7, ner_zh(), pku(), 1, &["T7[-1,0]=北京 大学", "T7[0,1]=大学 招生"]),
        g("ner-zh", 8, ner_zh(), pku(), 1, &["T8[-1]p1=北", "T8[-1]p2=北京", "T8[0]p1=大", "T8[0]p2=大学"]),
        g("ner-zh", 9, ner_zh(), pku(), 1, &["T9[-1]s1=京", "T9[-1]s2=北京", "T9[0]s1=学", "T9[0]s2=大学"]),
        g("ner-zh", 10, ner_zh(), pku(), 1, &["T10[0]r0=大", "T10[0]r1=子"]),
        g("ner-zh", 11, ner_zh(), pku(), 1, &["T11[0]=101"]),
    ]
}
