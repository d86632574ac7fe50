/* C interface to the switching-control branch-and-bound solver.
 *
 * Handles are opaque; every fallible call either returns a handle (NULL on
 * failure) or an error code (0 on success). swb_last_error() describes the
 * most recent failure on the calling thread. */
#ifndef SWITCHBNB_H
#define SWITCHBNB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct swb_instance swb_instance;
typedef struct swb_options swb_options;
typedef struct swb_result swb_result;

const char* swb_last_error(void);

/* Tracking instances: a hidden binary control with `theta` jumps at distinct
 * interior nodes of a fine uniform grid, drawn by a seeded PRNG. */
swb_instance* swb_instance_generate(int theta, unsigned long long seed);
swb_instance* swb_instance_load(const char* path);
int swb_instance_save(const swb_instance* inst, const char* path);
int swb_instance_theta(const swb_instance* inst);
unsigned long long swb_instance_seed(const swb_instance* inst);
void swb_instance_free(swb_instance* inst);

/* Solver knobs, all numeric. Keys:
 *   sigma       switching budget (selects the bounded-variation constraint)
 *   dwell       minimum dwell time (selects the dwell constraint)
 *   tol         relative pruning tolerance            (default 0.02)
 *   red         stall threshold on the lower bound    (default 0.02)
 *   alpha       control cost weight                   (default 0.005)
 *   beta        proximal weight                       (default 0.005)
 *   gamma       refinement fraction                   (default 0.5)
 *   grid_init   initial temporal cells                (default 20)
 *   max_refine  refinement cap per subproblem         (default 8)
 *   threads     worker threads                        (default 1)
 *   space_cells spatial mesh cells                    (default 64)
 * Exactly one of sigma/dwell must be set before swb_solve. */
swb_options* swb_options_create(void);
int swb_options_set(swb_options* opt, const char* key, double value);
void swb_options_free(swb_options* opt);

swb_result* swb_solve(const swb_instance* inst, const swb_options* opt);

/* Scalar statistics by name: subs, cuts, admm, fix_points, fix_indices, obj,
 * seconds, refine, ratio, gap, unresolved, weakened, feasible.
 * Unknown names return NaN. */
double swb_result_stat(const swb_result* res, const char* name);

/* Incumbent control as a step function: `cells`+1 nodes, `cells` values. */
int swb_result_control(const swb_result* res, const double** nodes, const double** values,
                       int* cells);
/* Two-column node/value text dump of the incumbent control. */
int swb_result_write_control(const swb_result* res, const char* path);
/* Per-subproblem event log, comma-separated with a header row. */
int swb_result_write_events(const swb_result* res, const char* path);
void swb_result_free(swb_result* res);

#ifdef __cplusplus
}
#endif

#endif
