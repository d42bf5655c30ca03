"""
BM25 ranking over an inverted index
===================================

The score of a document for a query adds, per query token, an inverse
document frequency factor and a saturated, length-normalized term
frequency (k1 = 1.2, b = 0.75 by default). Negative IDF contributions
of very common terms are kept unless explicitly floored.
"""
import datetime

from citeval import Paragraph, ParagraphId, bm25_score, bm25_top_k, build_bm25_index, tokenize

texts = {
    "a:1": "the national court must ensure effective protection of union law rights",
    "a:2": "the advocate general delivered an opinion on the customs duty question",
    "b:1": "protection of union law rights requires effective remedies before the national court",
    "b:2": "a wholly different subject: milk quotas and agricultural levies",
    "c:1": "the court recalled the principle of proportionality in customs matters",
}
paragraphs = [
    Paragraph(ParagraphId.parse(pid), "demo", datetime.date(2015, 1, 1), text)
    for pid, text in texts.items()
]

index = build_bm25_index(paragraphs)
print(f"indexed {index.n_docs} documents, average length {index.avg_len:.2f} tokens")
for term in ("court", "protection", "milk"):
    print(f"  df({term!r}) = {index.df(term)}, idf = {index.idf(term):+.4f}")

query = tokenize("effective protection of rights before the national court")
print("\nquery tokens:", query)

top = bm25_top_k(index, query, k=5)
print("\nranking (score desc, id breaks ties):")
for rank, (doc, score) in enumerate(top, start=1):
    print(f"  {rank}. {doc}  {score:+.4f}")

# single-document scoring agrees with the ranking above
doc = ParagraphId.parse("b:1")
print(f"\nbm25_score for {doc}: {bm25_score(index, query, doc):+.4f}")
