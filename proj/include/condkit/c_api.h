/* Flat C interface for foreign-function bindings.
 *
 * Every function returning int reports 0 on success or a condkit error code
 * (the same values as condkit::ErrorCode and the CLI exit statuses). The
 * name and message of the last failure on the calling thread are available
 * through condkit_last_error_name / condkit_last_error_message.
 *
 * Arrays cross the boundary only as caller-owned contiguous buffers that the
 * library copies into. A handle must not be used from two threads at once.
 */
#ifndef CONDKIT_C_API_H
#define CONDKIT_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define CONDKIT_BUFFER_TOO_SMALL (-1)

typedef struct condkit_scene condkit_scene;
typedef struct condkit_stream condkit_stream;

typedef struct condkit_conditioning_options {
  int quantile;                /* 0 linear, 1 nearest rank */
  int downsample;              /* depth downsampling factor, >= 1 */
  double viewer_default_scale; /* viewer scale when the input view has no depth */
  double viewer_scale;         /* > 0 replaces the viewer scale; <= 0 means unset */
} condkit_conditioning_options;

condkit_conditioning_options condkit_conditioning_options_default(void);

int condkit_last_error_code(void);
const char* condkit_last_error_name(void);
const char* condkit_last_error_message(void);

/* Scenes -------------------------------------------------------------- */

int condkit_scene_load(const char* scene_dir, condkit_scene** out);
/* Loads one scene from a shard by id. */
int condkit_scene_load_from_shard(const char* shard_path, const char* scene_id, condkit_scene** out);
void condkit_scene_close(condkit_scene* scene);

size_t condkit_scene_view_count(const condkit_scene* scene);
double condkit_scene_fov(const condkit_scene* scene);
/* Copies the scene id (NUL-terminated) into buf; CONDKIT_BUFFER_TOO_SMALL if
 * capacity is not enough. */
int condkit_scene_id(const condkit_scene* scene, char* buf, size_t capacity);
/* view_count x 16 row-major float32 camera-to-world matrices. */
int condkit_scene_extrinsics(const condkit_scene* scene, float* out, size_t capacity);
/* Width and height of a view's depth map; 0 x 0 when the view has none. */
int condkit_scene_depth_shape(const condkit_scene* scene, size_t view, int* width, int* height);
/* width x height float32 depths and uint8 validity mask; either may be NULL. */
int condkit_scene_depth(const condkit_scene* scene, size_t view, float* depth, uint8_t* mask,
                        size_t capacity);

/* Conditioning vector of views (i, j) as float32, exactly the entries the
 * serialized form carries. `length` receives 3 or 19. `options` may be NULL. */
int condkit_conditioning(const condkit_scene* scene, int i, int j, int variant,
                         const condkit_conditioning_options* options, float* out,
                         size_t capacity, size_t* length);
/* Variant tag for a snake_case name such as "sixdof_viewer". */
int condkit_variant_from_name(const char* name, int* variant);

/* Pair streams -------------------------------------------------------- */

/* Sequential stream over the shards: the same samples, in the same order,
 * as the library's single-worker stream with this seed. */
int condkit_pair_stream_open(const char* const* shard_paths, size_t count, double rate,
                             uint64_t seed, condkit_stream** out);
void condkit_pair_stream_close(condkit_stream* stream);
/* Advances to the next pair. *has_item is 0 once the epoch has ended. */
int condkit_pair_stream_next(condkit_stream* stream, int* has_item);
/* Starts the stream over from the first shard with the original seed. */
int condkit_pair_stream_reset(condkit_stream* stream);

/* Accessors for the current pair. */
int condkit_pair_indices(const condkit_stream* stream, int* input, int* target);
int condkit_pair_id(const condkit_stream* stream, char* buf, size_t capacity);
/* New handle on the current pair's scene; close it with condkit_scene_close. */
int condkit_pair_scene(const condkit_stream* stream, condkit_scene** out);
/* Scenes skipped so far because they could not be read. */
size_t condkit_pair_stream_failures(const condkit_stream* stream);

#ifdef __cplusplus
}
#endif

#endif /* CONDKIT_C_API_H */
