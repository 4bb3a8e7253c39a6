from data.resources import (
    Lexicon, Resources,
    load_lexicon, load_reputation, load_confusables, load_synonyms,
    load_neutral_sentences, load_reference_corpus, load_resources,
    default_output_root,
)
