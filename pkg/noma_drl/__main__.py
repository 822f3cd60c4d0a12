import sys

from noma_drl.run_experiment import main

sys.exit(main())
