"""
TF-IDF scoring on a top-K n-gram vocabulary
===========================================

The vocabulary is the K most frequent n-grams of the *training*
paragraphs (total occurrences, ties alphabetical). Texts become sparse
count-times-smoothed-idf vectors over that vocabulary and are compared
by cosine. Unigrams (n=1) and bigrams (n=2) mirror the two lexical
baselines the engine ships.
"""
import datetime

from citeval import Paragraph, ParagraphId, TfidfIndex, build_tfidf_vocab, tfidf_score, tokenize

train_texts = [
    "the court has held that the directive precludes national legislation",
    "national legislation may not undermine the effectiveness of the directive",
    "the court has held that member states retain that competence",
]
pool_texts = train_texts + [
    "an unrelated paragraph about fishing quotas in coastal waters",
]

train = [
    Paragraph(ParagraphId("train", i + 1), "demo", datetime.date(2010, 1, 1), text)
    for i, text in enumerate(train_texts)
]
pool = [
    Paragraph(ParagraphId("pool", i + 1), "demo", datetime.date(2012, 1, 1), text)
    for i, text in enumerate(pool_texts)
]

for n in (1, 2):
    vocab = build_tfidf_vocab(train, n=n, k=12)
    print(f"top {len(vocab)} {n}-grams of the training set:")
    for gram in vocab.entries[:6]:
        print(f"  {' '.join(gram):40s} freq={vocab.freq[gram]} df={vocab.df[gram]}")

    query = tokenize("the court has held that national legislation is precluded")
    index = TfidfIndex(vocab, pool)
    print(f"ranking under {n}-gram vocabulary:")
    for doc, score in index.top_k(query, k=4):
        print(f"  {doc}  {score:.4f}")
    print()

# pairwise scoring without an index gives the same cosine
vocab = build_tfidf_vocab(train, n=1, k=12)
q = tokenize("the court has held")
d = tokenize("the court has held that member states retain that competence")
print("pairwise tfidf_score:", round(tfidf_score(vocab, q, d), 4))
