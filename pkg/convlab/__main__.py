from convlab.main import main

raise SystemExit(main())
