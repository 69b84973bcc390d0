use std::collections::BTreeSet;

use super::{BusinessKind, Catalog, FeatureKind, GuideEntry, HarmKind};

const BUSINESSES: [(u8, &str, &[u8]); 14] = [
    (1, "Home security system that uses facial recognition to identify the person at your door", &[5, 8, 10, 11, 13]),
    (2, "Crime prediction tool that can predict future crimes one week in advance with about 90% accuracy", &[7, 8, 10, 11]),
    (3, "Personalized advertisement technology on websites people browse", &[5, 6]),
    (4, "Hiring algorithms that automate hiring in big companies to reduce the time taken to go through thousands of resumes", &[3, 7, 8, 12]),
    (5, "College admissions automator that decides who should be admitted based on different aspects in their application", &[7, 8, 12]),
    (6, "Self-driving cars", &[7, 8, 10]),
    (7, "Conversational agents", &[2, 3, 4, 5, 6]),
    (8, "Language translation algorithm", &[2, 7, 8]),
    (9, "Medical imaging to detect skin cancer from face images", &[7, 8, 13]),
    (10, "Recommender system for social media apps that personalizes your homepage's feed", &[1, 2, 3, 4, 5, 6]),
    (11, "Generative AI Art magazine", &[2, 7, 8, 11]),
    (12, "Face filters people can use to apply different styles to their face", &[1, 8]),
    (13, "Social interactive robot", &[1, 5, 6, 13]),
    (14, "Personalizing search engine results to give you results specific to your past searches", &[1, 2, 3]),
];

// Colors are spread around the wheel so no two neighbours read alike; every
// harm also gets its own shape.
const HARMS: [(u8, &str, &str, &str); 13] = [
    (1, "Increased mental health challenges like depression, body dysmorphia, eating disorders", "crimson", "circle"),
    (2, "Spreading misinformation", "orange", "square"),
    (3, "Forming filter bubbles that isolate unique opinions from one another", "gold", "triangle"),
    (4, "Encouraging hateful behavior and hate groups", "olive", "diamond"),
    (5, "Leaking your personal details to other parties", "green", "pentagon"),
    (6, "Manipulating people's buying behaviors", "teal", "hexagon"),
    (7, "Taking over existing human jobs", "sky", "star"),
    (8, "Algorithmic bias discriminating people based on their race, gender, ethnicity, or occupation", "navy", "heart"),
    (9, "Misdiagnosing a patient's illness", "violet", "cross"),
    (10, "Over-Policing neighborhoods", "magenta", "crescent"),
    (11, "Leading to wrongful arrests of people", "brown", "arrow"),
    (12, "Marginalizing populations already under-represented in the workforce", "gray", "octagon"),
    (13, "Overly placing trust in imperfect technology", "black", "trapezoid"),
];

const FEATURES: [(u8, &str, &[u8]); 7] = [
    (1, "Making the underlying AI technology and data usage transparent and explainable to users", &[1, 2, 3, 5, 6, 9, 13]),
    (2, "End to end encryption of data collected", &[5]),
    (3, "Collecting a balanced, diverse and large dataset to train the AI technology to reduce algorithmic bias", &[3, 8, 11]),
    (4, "Enabling people to control the degree of automation in their tools", &[3, 6, 9, 10, 13]),
    (5, "Employing a diverse team to develop this technology to gain diverse perspectives and address diverse needs", &[1, 4, 7, 12]),
    (6, "Including all affected populations of the technology in the design of the system", &[1, 7, 12]),
    (7, "Decision making by AI technologies to be examined by humans in the loop", &[2, 7, 8, 9, 13]),
];

const HIRING_BIAS: &str = "Resume sorters often make use of historical data with demographic information to \
make decisions about new data. This historical data might often have algorithmic biases, or might prefer \
candidates based on their race, gender, economic status or even their name. A recent study found that hiring \
algorithms are more likely to select applicants with common white names like Emily or Greg, versus \
distinctively Black names like Jamal or Lakisha.";

const HIRING_JOBS: &str = "Replacing a human recruiter with an automated hiring system may be time efficient, \
but what happens to the human recruiter's job? Is it now redundant? According to a recent survey, companies \
are increasingly adopting AI powered screening tools for the first round of resume sorting, dramatically \
altering human recruiters' jobs.";

fn ids(list: &[u8]) -> BTreeSet<u8> {
    list.iter().copied().collect()
}

pub(super) fn build() -> Catalog {
    Catalog {
        businesses: BUSINESSES
            .iter()
            .map(|&(id, title, harms)| BusinessKind { id, title: title.into(), harms: ids(harms) })
            .collect(),
        harms: HARMS
            .iter()
            .map(|&(id, title, color, shape)| HarmKind {
                id,
                title: title.into(),
                color: color.into(),
                shape: shape.into(),
            })
            .collect(),
        features: FEATURES
            .iter()
            .map(|&(id, title, counters)| FeatureKind { id, title: title.into(), counters: ids(counters) })
            .collect(),
        guide: vec![
            GuideEntry { business: 4, harm: 8, text: HIRING_BIAS.into() },
            GuideEntry { business: 4, harm: 7, text: HIRING_JOBS.into() },
        ],
    }
}
