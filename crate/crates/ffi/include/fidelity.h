#ifndef FIDELITY_H
#define FIDELITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every call.
 */
typedef enum FidelityStatus {
  FIDELITY_STATUS_OK = 0,
  FIDELITY_STATUS_NULL_POINTER = 1,
  FIDELITY_STATUS_INVALID_UTF8 = 2,
  FIDELITY_STATUS_INVALID_INPUT = 3,
  FIDELITY_STATUS_IO = 4,
  FIDELITY_STATUS_MALFORMED = 5,
  FIDELITY_STATUS_NON_POSITIVE_DENOMINATOR = 6,
  FIDELITY_STATUS_OUT_OF_VOCABULARY = 7,
  FIDELITY_STATUS_PANIC = 8,
  FIDELITY_STATUS_OTHER = 9,
} FidelityStatus;

/*
 A loaded corpus.
 */
typedef struct FidelityCorpus FidelityCorpus;

/*
 A loaded word-embedding table.
 */
typedef struct FidelityEmbeddings FidelityEmbeddings;

/*
 A loaded category lexicon.
 */
typedef struct FidelityLexicon FidelityLexicon;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer
 stays valid until the next call on the same thread.
 */
const char *fidelity_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *fidelity_version(void);

/*
 Releases a string returned by this library.

 # Safety
 `s` must be NULL or a string returned through an out-pointer of this
 library that has not been freed yet.
 */
void fidelity_string_free(char *s);

/*
 Log-odds with an informative Dirichlet prior over `n` categories.
 Writes delta, variance and z-score per category into the three output
 arrays, each of length `n`.

 # Safety
 Input arrays must hold `n` readable values and output arrays `n`
 writable values.
 */
enum FidelityStatus fidelity_log_odds(const double *y_i,
                                      const double *y_j,
                                      const double *alpha,
                                      size_t n,
                                      double *out_delta,
                                      double *out_variance,
                                      double *out_zscore);

/*
 Fleiss' kappa of a row-major `items` x `labels` matrix of rater counts.
 A matrix where every rating used a single label yields 1.

 # Safety
 `counts` must hold `items * labels` readable values.
 */
enum FidelityStatus fidelity_fleiss_kappa(const uint32_t *counts,
                                          size_t items,
                                          size_t labels,
                                          double *out_kappa);

/*
 Tokenizes `text` into `{"tokens": [...], "stems": [...]}`.

 # Safety
 `text` must be a NUL-terminated string; `out_json` must be writable.
 */
enum FidelityStatus fidelity_tokenize_json(const char *text, char **out_json);

/*
 Loads a JSONL or CSV corpus (chosen by extension).

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FidelityStatus fidelity_corpus_load(const char *path, struct FidelityCorpus **out);

/*
 Number of documents, or 0 for NULL.

 # Safety
 `corpus` must be NULL or a live handle.
 */
size_t fidelity_corpus_len(const struct FidelityCorpus *corpus);

/*
 Demographic margins as `{"total": n, "margins": {...}}`.

 # Safety
 `corpus` must be a live handle; `out_json` must be writable.
 */
enum FidelityStatus fidelity_corpus_stats_json(const struct FidelityCorpus *corpus,
                                               char **out_json);

/*
 # Safety
 `corpus` must be NULL or a handle not yet freed.
 */
void fidelity_corpus_free(struct FidelityCorpus *corpus);

/*
 Loads a `.dic` category lexicon.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FidelityStatus fidelity_lexicon_load(const char *path, struct FidelityLexicon **out);

/*
 Category counts over a whole corpus as `{"counts": {...}, "total_tokens": n}`.

 # Safety
 Both handles must be live; `out_json` must be writable.
 */
enum FidelityStatus fidelity_lexicon_count_json(const struct FidelityLexicon *lexicon,
                                                const struct FidelityCorpus *corpus,
                                                char **out_json);

/*
 # Safety
 `lexicon` must be NULL or a handle not yet freed.
 */
void fidelity_lexicon_free(struct FidelityLexicon *lexicon);

/*
 Loads a GloVe-format text file of `dim`-dimensional vectors.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FidelityStatus fidelity_embeddings_load(const char *path,
                                             size_t dim,
                                             struct FidelityEmbeddings **out);

/*
 Number of words, or 0 for NULL.

 # Safety
 `emb` must be NULL or a live handle.
 */
size_t fidelity_embeddings_len(const struct FidelityEmbeddings *emb);

/*
 Cosine between the mean vectors of two whitespace-separated keyword
 lists. Keywords missing from the table are skipped.

 # Safety
 `emb` must be a live handle, the keyword lists NUL-terminated strings and
 `out_cosine` writable.
 */
enum FidelityStatus fidelity_topic_similarity(const struct FidelityEmbeddings *emb,
                                              const char *keywords_a,
                                              const char *keywords_b,
                                              double *out_cosine);

/*
 # Safety
 `emb` must be NULL or a handle not yet freed.
 */
void fidelity_embeddings_free(struct FidelityEmbeddings *emb);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIDELITY_H */
