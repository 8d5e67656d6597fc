"""Task id -> network interface, champion metrics and lifetime runner."""

from dataclasses import dataclass

from nagi_lab.api.validators import validate_task
from nagi_lab.config.profiles import TASK_CART_POLE, TASK_FOOD_FORAGING, TASK_LOGIC_GATE
from nagi_lab.tasks import cartpole
from nagi_lab.tasks.environments import (
    ENVIRONMENTS,
    MODE_TRAIN,
    DamageModel,
    FoodForagingEnvironment,
    LogicGateEnvironment,
    run_lifetime,
)

METRIC_FITNESS = "fitness"
METRIC_ACCURACY = "accuracy"
METRIC_EOS_ACCURACY = "eos_accuracy"


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    n_inputs: int
    n_outputs: int
    # Champion kinds persisted after a run; the first one is replayed by `acceptance`
    champion_metrics: tuple
    has_accuracy: bool = True


TASKS = {
    TASK_FOOD_FORAGING: TaskSpec(
        TASK_FOOD_FORAGING,
        FoodForagingEnvironment.n_data_inputs + 2,
        FoodForagingEnvironment.n_outputs,
        (METRIC_EOS_ACCURACY, METRIC_ACCURACY, METRIC_FITNESS),
    ),
    TASK_LOGIC_GATE: TaskSpec(
        TASK_LOGIC_GATE,
        LogicGateEnvironment.n_data_inputs + 2,
        LogicGateEnvironment.n_outputs,
        (METRIC_ACCURACY, METRIC_EOS_ACCURACY, METRIC_FITNESS),
    ),
    TASK_CART_POLE: TaskSpec(
        TASK_CART_POLE,
        cartpole.N_INPUTS,
        cartpole.N_OUTPUTS,
        (METRIC_FITNESS,),
        has_accuracy=False,
    ),
}


def get_task(task_id):
    return TASKS[validate_task(task_id)]


def build_environment(config, rng, mode=MODE_TRAIN):
    """Binary environment for `config.task`, with its order drawn from `rng`."""
    return ENVIRONMENTS[config.task](config.binary, rng, mode)


def run_task_lifetime(net, config, rng, mode=MODE_TRAIN, trace_every=None):
    """
    Run one lifetime of the configured task.

    Args:
        net (Network): Developed network with the task's interface.
        config (EvolutionConfig): Resolved configuration.
        rng (numpy.random.Generator): Lifetime random source (orders, resets).
        mode (str): "train" or "test".
        trace_every (int, optional): Actuator trace stride in network steps.

    Returns:
        LifetimeReport
    """
    task = get_task(config.task)
    if task.task_id == TASK_CART_POLE:
        schedule = cartpole.PoleSchedule.from_config(config.cartpole)
        return cartpole.run_cartpole_lifetime(
            net, schedule, mode, rng, config.cartpole, config.simulation.dt_ms, trace_every
        )

    env = build_environment(config, rng, mode)
    model = DamageModel.from_config(config.damage, config.binary.initial_health)
    return run_lifetime(net, env, model, config.simulation.dt_ms, trace_every)
