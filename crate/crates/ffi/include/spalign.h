#ifndef SPALIGN_H
#define SPALIGN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_ARGUMENT = 1,
  SP_STATUS_INVALID_UTF8 = 2,
  SP_STATUS_GRAMMAR_SYNTAX = 3,
  SP_STATUS_GRAMMAR_INVALID = 4,
  SP_STATUS_UNKNOWN_GRAMMAR = 5,
  SP_STATUS_EMPTY_SENTENCE = 6,
  SP_STATUS_PRONOUN_NOT_IN_SENTENCE = 7,
  SP_STATUS_NO_PRONOUN_INSTANCE = 8,
  SP_STATUS_NO_BRIDGE = 9,
  SP_STATUS_AMBIGUOUS_BRIDGE = 10,
  SP_STATUS_INTERNAL = 11,
} SpStatus;

// A built grammar.
typedef struct SpGrammar SpGrammar;

// The outcome of a successful resolution.
typedef struct SpResolution SpResolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a grammar from grammar-file text.
//
// # Safety
// `src` is a NUL-terminated string and `out` a valid pointer.
enum SpStatus sp_grammar_from_text(const char *src, struct SpGrammar **out);

// Builds one of the bundled grammars, such as `fish_worm.spg`.
//
// # Safety
// `name` is a NUL-terminated string and `out` a valid pointer.
enum SpStatus sp_grammar_bundled(const char *name, struct SpGrammar **out);

// # Safety
// `g` is null or was returned by a grammar constructor and not yet freed.
void sp_grammar_free(struct SpGrammar *g);

// Number of patterns in the grammar, 0 for null.
//
// # Safety
// `g` is null or a live grammar handle.
size_t sp_grammar_len(const struct SpGrammar *g);

// Parses a whitespace-separated sentence with default search settings and
// writes the best alignment's scores. `render`, when not null, receives the
// rendered alignment, to be released with `sp_string_free`.
//
// # Safety
// `g` is a live grammar handle, `sentence` a NUL-terminated string, and each
// output pointer null or valid.
enum SpStatus sp_parse(const struct SpGrammar *g,
                       const char *sentence,
                       double *bn,
                       double *be,
                       double *cd,
                       char **render);

// Resolves `pronoun` in a whitespace-separated sentence, trying direct
// links before links through class patterns.
//
// # Safety
// `g` is a live grammar handle, `sentence` and `pronoun` NUL-terminated
// strings, and `out` a valid pointer.
enum SpStatus sp_resolve(const struct SpGrammar *g,
                         const char *sentence,
                         const char *pronoun,
                         struct SpResolution **out);

// The referent word; valid until the resolution is freed.
//
// # Safety
// `r` is a live resolution handle.
const char *sp_resolution_referent(const struct SpResolution *r);

// The bridge pattern id; valid until the resolution is freed.
//
// # Safety
// `r` is a live resolution handle.
const char *sp_resolution_bridge(const struct SpResolution *r);

// The attribute symbol linking pronoun and referent; valid until the
// resolution is freed.
//
// # Safety
// `r` is a live resolution handle.
const char *sp_resolution_attribute(const struct SpResolution *r);

// # Safety
// `r` is a live resolution handle.
double sp_resolution_confidence(const struct SpResolution *r);

// Compression difference of the alignment the resolution rests on.
//
// # Safety
// `r` is a live resolution handle.
double sp_resolution_cd(const struct SpResolution *r);

// # Safety
// `r` is null or a resolution handle not yet freed.
void sp_resolution_free(struct SpResolution *r);

// # Safety
// `s` is null or a string returned by this library and not yet freed.
void sp_string_free(char *s);

// Static name of a status code.
const char *sp_status_name(enum SpStatus s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPALIGN_H */
