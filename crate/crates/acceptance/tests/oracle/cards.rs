//! The printed card lists, typed in by hand.

pub const BUSINESSES: [(&str, &[u8]); 14] = [
    ("Home security system that uses facial recognition to identify the person at your door", &[5, 8, 10, 11, 13]),
    ("Crime prediction tool that can predict future crimes one week in advance with about 90% accuracy", &[7, 8, 10, 11]),
    ("Personalized advertisement technology on websites people browse", &[5, 6]),
    (
        "Hiring algorithms that automate hiring in big companies to reduce the time taken to go through thousands of resumes",
        &[3, 7, 8, 12],
    ),
    (
        "College admissions automator that decides who should be admitted based on different aspects in their application",
        &[7, 8, 12],
    ),
    ("Self-driving cars", &[7, 8, 10]),
    ("Conversational agents", &[2, 3, 4, 5, 6]),
    ("Language translation algorithm", &[2, 7, 8]),
    ("Medical imaging to detect skin cancer from face images", &[7, 8, 13]),
    ("Recommender system for social media apps that personalizes your homepage's feed", &[1, 2, 3, 4, 5, 6]),
    ("Generative AI Art magazine", &[2, 7, 8, 11]),
    ("Face filters people can use to apply different styles to their face", &[1, 8]),
    ("Social interactive robot", &[1, 5, 6, 13]),
    ("Personalizing search engine results to give you results specific to your past searches", &[1, 2, 3]),
];

pub const HARMS: [&str; 13] = [
    "Increased mental health challenges like depression, body dysmorphia, eating disorders",
    "Spreading misinformation",
    "Forming filter bubbles that isolate unique opinions from one another",
    "Encouraging hateful behavior and hate groups",
    "Leaking your personal details to other parties",
    "Manipulating people's buying behaviors",
    "Taking over existing human jobs",
    "Algorithmic bias discriminating people based on their race, gender, ethnicity, or occupation",
    "Misdiagnosing a patient's illness",
    "Over-Policing neighborhoods",
    "Leading to wrongful arrests of people",
    "Marginalizing populations already under-represented in the workforce",
    "Overly placing trust in imperfect technology",
];

pub const FEATURES: [(&str, &[u8]); 7] = [
    ("Making the underlying AI technology and data usage transparent and explainable to users", &[1, 2, 3, 5, 6, 9, 13]),
    ("End to end encryption of data collected", &[5]),
    (
        "Collecting a balanced, diverse and large dataset to train the AI technology to reduce algorithmic bias",
        &[3, 8, 11],
    ),
    ("Enabling people to control the degree of automation in their tools", &[3, 6, 9, 10, 13]),
    (
        "Employing a diverse team to develop this technology to gain diverse perspectives and address diverse needs",
        &[1, 4, 7, 12],
    ),
    ("Including all affected populations of the technology in the design of the system", &[1, 7, 12]),
    ("Decision making by AI technologies to be examined by humans in the loop", &[2, 7, 8, 9, 13]),
];

/// Titles compared loosely: typographic apostrophes and a trailing period
/// do not count as differences.
pub fn same_title(a: &str, b: &str) -> bool {
    let norm = |s: &str| s.replace('\u{2019}', "'").trim().trim_end_matches('.').to_string();
    norm(a) == norm(b)
}
