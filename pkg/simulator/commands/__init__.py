from . import correlations, decay_fit, epsilon, histories, kernel, partition, validate

# subcommand name -> module exposing run(config)
COMMANDS = {
    "epsilon": epsilon,
    "kernel": kernel,
    "histories": histories,
    "correlations": correlations,
    "decay-fit": decay_fit,
    "validate": validate,
    "partition": partition,
}
